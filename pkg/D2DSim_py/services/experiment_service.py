"""
Experiment service - sweeps every (algorithm, D2D count, seed) cell of an
ExperimentConfig and aggregates the rows.

Within one (D, seed) group every algorithm is scored on the same held-out
topologies, and the DQN agent of that group is trained from scratch.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from core.config import settings
from core.exceptions import SweepError
from models.agent import EvaluationMetrics, Scenario
from models.experiment import ALGORITHMS, ExperimentConfig, ResultRow
from services.training_service import (
    draw_scenarios,
    evaluate,
    evaluate_policy,
    max_power_baseline,
    olpc_baseline,
    train,
)
from utils.file_storage import model_path_for, write_model

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ["system_throughput_bps_hz", "d2d_throughput_bps_hz", "cue_qos_rate"]
BASELINES = ("max_power", "olpc")

# stream labels mixed into each group's seed sequence
EVAL_STREAM = 0
TRAIN_STREAM = 1


def group_rng(seed: int, d2d_count: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, d2d_count, stream])


def run_algorithm(
    algorithm: str,
    config: ExperimentConfig,
    scenarios: List[Scenario],
    seed: int,
    model_dir: Optional[str] = None,
) -> EvaluationMetrics:
    """Score one algorithm on `scenarios`; trains a fresh DQN agent first when needed."""
    if algorithm == "dqn":
        result = train(config, group_rng(seed, config.cell.num_d2d_pairs, TRAIN_STREAM))
        if model_dir:
            write_model(result.networks, model_path_for(config.cell.num_d2d_pairs, seed, model_dir), seed=result.seed)
        return evaluate(result.networks, scenarios, config)
    if algorithm == "max_power":
        return evaluate_policy(max_power_baseline(config), scenarios, config)
    if algorithm == "olpc":
        return evaluate_policy(olpc_baseline(config), scenarios, config)
    raise ValueError(f"unknown algorithm '{algorithm}'")


def to_result_row(algorithm: str, d2d_count: int, seed: int, metrics: EvaluationMetrics, wall_time_s: float) -> ResultRow:
    return ResultRow(
        algorithm=algorithm,
        d2d_count=d2d_count,
        seed=seed,
        system_throughput_bps_hz=metrics.system_throughput_bps_hz,
        d2d_throughput_bps_hz=metrics.d2d_throughput_bps_hz,
        cue_qos_rate=metrics.cue_qos_rate,
        wall_time_s=wall_time_s,
    )


def _run_group(config: ExperimentConfig, d2d_count: int, seed: int) -> Tuple[List[ResultRow], List[Dict[str, Any]]]:
    rows: List[ResultRow] = []
    failures: List[Dict[str, Any]] = []
    cell_config = config.for_d2d_count(d2d_count)
    if d2d_count > cell_config.cell.num_cues:
        logger.warning(f"⚠️ D={d2d_count} exceeds {cell_config.cell.num_cues} RBs; pairs will share RBs")

    try:
        scenarios = draw_scenarios(
            cell_config, group_rng(seed, d2d_count, EVAL_STREAM), cell_config.env.eval_topologies
        )
    except Exception as e:
        logger.error(f"❌ Could not draw evaluation topologies for D={d2d_count} seed={seed}: {str(e)}")
        failures.extend(
            {"algorithm": algorithm, "d2d_count": d2d_count, "seed": seed, "error": str(e)}
            for algorithm in config.algorithms
        )
        return rows, failures

    for algorithm in config.algorithms:
        start_time = time.perf_counter()
        try:
            metrics = run_algorithm(algorithm, cell_config, scenarios, seed, config.model_dir)
            row = to_result_row(algorithm, d2d_count, seed, metrics, time.perf_counter() - start_time)
        except Exception as e:
            logger.error(f"❌ Sweep cell {algorithm}/D={d2d_count}/seed={seed} failed: {str(e)}")
            failures.append({"algorithm": algorithm, "d2d_count": d2d_count, "seed": seed, "error": str(e)})
            continue
        rows.append(row)
        logger.info(
            f"✅ {algorithm} D={d2d_count} seed={seed}: "
            f"system {row.system_throughput_bps_hz:.3f} bps/Hz, "
            f"QoS {row.cue_qos_rate:.1%} ({row.wall_time_s:.2f}s)"
        )
    return rows, failures


def _row_order(config: ExperimentConfig):
    rank = {algorithm: i for i, algorithm in enumerate(config.algorithms)}
    return lambda row: (rank[row.algorithm], row.d2d_count, row.seed)


def run_sweep(config: ExperimentConfig, workers: Optional[int] = None) -> List[ResultRow]:
    """One ResultRow per (algorithm, d2d_count, seed).

    Each (d2d_count, seed) group owns its random streams, derived from the seed
    and D alone, so the rows do not depend on worker count or group order.
    Raises SweepError after all groups ran if any cell failed; the rows that
    did complete are attached to the error.
    """
    workers = workers or settings.SWEEP_WORKERS
    groups = [(d2d_count, seed) for d2d_count in config.d2d_counts for seed in config.seeds]
    logger.info(
        f"🔄 Sweep: {len(config.algorithms)} algorithm(s) x {len(config.d2d_counts)} D value(s) "
        f"x {len(config.seeds)} seed(s), {workers} worker(s)"
    )
    start_time = time.time()

    rows: List[ResultRow] = []
    failures: List[Dict[str, Any]] = []
    if workers > 1 and len(groups) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(groups))) as pool:
            futures = [pool.submit(_run_group, config, d2d_count, seed) for d2d_count, seed in groups]
            for (d2d_count, seed), future in zip(groups, futures):
                try:
                    group_rows, group_failures = future.result()
                except Exception as e:
                    group_rows = []
                    group_failures = [
                        {"algorithm": algorithm, "d2d_count": d2d_count, "seed": seed, "error": str(e)}
                        for algorithm in config.algorithms
                    ]
                rows.extend(group_rows)
                failures.extend(group_failures)
    else:
        for d2d_count, seed in groups:
            group_rows, group_failures = _run_group(config, d2d_count, seed)
            rows.extend(group_rows)
            failures.extend(group_failures)

    rows.sort(key=_row_order(config))
    if failures:
        raise SweepError(failures, rows)
    logger.info(f"✅ Sweep finished: {len(rows)} rows in {time.time() - start_time:.2f}s")
    return rows


def summarize_results(rows: List[ResultRow]) -> pd.DataFrame:
    """Mean/std over seeds per (algorithm, d2d_count), plus DQN's relative system-throughput gain per baseline."""
    gain_columns = [f"dqn_gain_over_{baseline}" for baseline in BASELINES]
    stat_columns = [f"{metric}_{stat}" for metric in METRIC_COLUMNS for stat in ("mean", "std")]
    columns = ["algorithm", "d2d_count", "runs"] + stat_columns + gain_columns
    if not rows:
        return pd.DataFrame(columns=columns)

    frame = pd.DataFrame([row.model_dump() for row in rows])
    grouped = frame.groupby(["algorithm", "d2d_count"])
    summary = grouped[METRIC_COLUMNS].agg(["mean", "std"])
    summary.columns = [f"{metric}_{stat}" for metric, stat in summary.columns]
    summary["runs"] = grouped.size()
    summary = summary.reset_index()

    # a single seed has no spread
    std_columns = [c for c in stat_columns if c.endswith("_std")]
    summary[std_columns] = summary[std_columns].fillna(0.0)

    means = summary.set_index(["algorithm", "d2d_count"])["system_throughput_bps_hz_mean"]
    for baseline, column in zip(BASELINES, gain_columns):
        summary[column] = np.nan
        for idx, row in summary[summary["algorithm"] == "dqn"].iterrows():
            key = (baseline, row["d2d_count"])
            if key in means.index and means[key] > 0:
                summary.loc[idx, column] = row["system_throughput_bps_hz_mean"] / means[key] - 1.0

    summary["_rank"] = summary["algorithm"].map(ALGORITHMS.index)
    summary = summary.sort_values(["_rank", "d2d_count"]).drop(columns="_rank").reset_index(drop=True)
    return summary[columns]
