from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field
from typing import Any, Dict, Optional
import asyncio
import logging
import time

from core.config import settings
from core.exceptions import SimulatorError, SweepError
from models.experiment import Algorithm, ExperimentConfig
from services.experiment_service import (
    EVAL_STREAM,
    group_rng,
    run_algorithm,
    run_sweep,
    summarize_results,
    to_result_row,
)
from services.training_service import draw_scenarios
from utils.config_loader import load_config, load_overrides

logger = logging.getLogger(__name__)
router = APIRouter()


class EvaluateRequest(BaseModel):
    algorithm: Algorithm = "dqn"
    d2d_count: int = Field(default=4, ge=0)
    seed: int = Field(default=0, ge=0)
    overrides: Dict[str, Any] = Field(default_factory=dict)


class SweepRequest(BaseModel):
    overrides: Dict[str, Any] = Field(default_factory=dict)


def _base_config() -> Optional[ExperimentConfig]:
    if settings.DEFAULT_CONFIG_PATH:
        return load_config(settings.DEFAULT_CONFIG_PATH)
    return None


def _check_training_budget(config: ExperimentConfig):
    if "dqn" in config.algorithms and config.env.episodes > settings.MAX_API_EPISODES:
        raise HTTPException(
            status_code=400,
            detail=f"episodes={config.env.episodes} exceeds the service limit of {settings.MAX_API_EPISODES}",
        )


def _evaluate(request: EvaluateRequest, config: ExperimentConfig) -> Dict[str, Any]:
    start_time = time.perf_counter()
    scenarios = draw_scenarios(
        config, group_rng(request.seed, request.d2d_count, EVAL_STREAM), config.env.eval_topologies
    )
    metrics = run_algorithm(request.algorithm, config, scenarios, request.seed)
    return to_result_row(
        request.algorithm, request.d2d_count, request.seed, metrics, time.perf_counter() - start_time
    ).model_dump()


def _sweep(config: ExperimentConfig) -> Dict[str, Any]:
    rows = run_sweep(config)
    summary = summarize_results(rows)
    # NaN is not valid JSON
    summary = summary.astype(object).where(summary.notna(), None)
    return {
        "rows": [row.model_dump() for row in rows],
        "summary": summary.to_dict(orient="records"),
    }


@router.get("/defaults")
async def get_defaults():
    config = _base_config() or ExperimentConfig()
    return {"success": True, "config": config.model_dump()}


@router.post("/evaluate")
async def evaluate_route(request: EvaluateRequest):
    try:
        config = load_overrides(
            {
                **request.overrides,
                "algorithms": [request.algorithm],
                "num_d2d_pairs": request.d2d_count,
                "seeds": [request.seed],
            },
            _base_config(),
        )
        _check_training_budget(config)
        logger.info(f"🔄 Evaluating {request.algorithm} D={request.d2d_count} seed={request.seed}")
        row = await asyncio.to_thread(_evaluate, request, config)
        return {"success": True, "result": row}
    except HTTPException:
        raise
    except SimulatorError as ve:
        logger.error(f"❌ Evaluation rejected: {str(ve)}")
        raise HTTPException(status_code=400, detail=str(ve))


@router.post("/sweep")
async def sweep_route(request: SweepRequest):
    try:
        config = load_overrides(request.overrides, _base_config())
        _check_training_budget(config)
        result = await asyncio.to_thread(_sweep, config)
        return {"success": True, **result}
    except HTTPException:
        raise
    except SweepError as se:
        logger.error(f"❌ Sweep finished with failures: {str(se)}")
        raise HTTPException(status_code=400, detail=str(se))
    except SimulatorError as ve:
        logger.error(f"❌ Sweep rejected: {str(ve)}")
        raise HTTPException(status_code=400, detail=str(ve))
