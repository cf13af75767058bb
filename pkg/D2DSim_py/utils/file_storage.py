import os
import json
import logging
from typing import List, Literal, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from core.config import settings
from core.exceptions import ModelFileError, ResultsFileError, ShapeError
from models.experiment import RESULT_COLUMNS, ResultRow
from services.q_network import Mlp

logger = logging.getLogger(__name__)

MODEL_FORMAT = "d2dsim-qnet"
MODEL_VERSION = 1


class LayerParams(BaseModel):
    weights: List[List[float]]   # row-major (fan_in, fan_out)
    biases: List[float]


class NetworkParams(BaseModel):
    layer_dims: List[int]
    seed: Optional[int] = None
    layers: List[LayerParams]


class ModelFile(BaseModel):
    format: Literal["d2dsim-qnet"]
    version: Literal[1]
    seed: Optional[int] = None
    shared: bool = True
    networks: List[NetworkParams]


def _ensure_parent(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def resolve_output_path(path: str) -> str:
    """Relative output paths land in settings.OUTPUT_DIR."""
    return path if os.path.isabs(path) else os.path.join(settings.OUTPUT_DIR, path)


def model_path_for(d2d_count: int, seed: int, model_dir: Optional[str] = None) -> str:
    directory = model_dir or settings.MODEL_DIR
    return os.path.join(directory, f"dqn_d{d2d_count}_s{seed}.json")


def write_results(rows: Sequence[ResultRow], path: str) -> str:
    """CSV with the fixed result header; floats keep full double precision."""
    try:
        _ensure_parent(path)
        frame = pd.DataFrame([row.model_dump() for row in rows], columns=RESULT_COLUMNS)
        frame.to_csv(path, index=False)
    except OSError as e:
        logger.error(f"❌ Error writing results: {str(e)}")
        raise ResultsFileError(path, f"cannot write results: {e.strerror or e}") from e
    logger.info(f"✅ Results stored: {path} ({len(rows)} rows)")
    return path


def read_results(path: str) -> List[ResultRow]:
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.EmptyDataError) as e:
        raise ResultsFileError(path, f"cannot read results: {e}") from e
    if list(frame.columns) != RESULT_COLUMNS:
        raise ResultsFileError(path, f"unexpected header {list(frame.columns)}")
    try:
        return [ResultRow(**record) for record in frame.to_dict(orient="records")]
    except ValidationError as e:
        raise ResultsFileError(path, f"invalid result row: {e.errors()[0]['msg']}") from e


def write_frame(frame: pd.DataFrame, path: str) -> str:
    try:
        _ensure_parent(path)
        frame.to_csv(path, index=False)
    except OSError as e:
        raise ResultsFileError(path, f"cannot write table: {e.strerror or e}") from e
    logger.info(f"✅ Table stored: {path} ({len(frame)} rows)")
    return path


def write_summary(summary: pd.DataFrame, path: str) -> str:
    return write_frame(summary, path)


def write_history(history: pd.DataFrame, path: str) -> str:
    """Per-episode training curve next to a model file."""
    return write_frame(history, path)


def write_model(networks: Sequence[Mlp], path: str, seed: Optional[int] = None) -> str:
    """Persist one shared network or one network per agent as versioned JSON."""
    if not networks:
        raise ShapeError("at least one network is required")
    document = ModelFile(
        format=MODEL_FORMAT,
        version=MODEL_VERSION,
        seed=seed,
        shared=len(networks) == 1,
        networks=[
            NetworkParams(
                layer_dims=net.layer_dims,
                seed=net.seed,
                layers=[
                    LayerParams(weights=w.tolist(), biases=b.tolist())
                    for w, b in zip(net.weights, net.biases)
                ],
            )
            for net in networks
        ],
    )
    try:
        _ensure_parent(path)
        with open(path, "w", encoding="utf-8") as f:
            # json writes floats with the shortest repr that round-trips exactly
            json.dump(document.model_dump(), f)
    except OSError as e:
        logger.error(f"❌ Error storing model: {str(e)}")
        raise ModelFileError(path, f"cannot write model: {e.strerror or e}") from e
    logger.info(f"✅ Model stored: {path} ({len(networks)} network(s))")
    return path


def read_model(path: str) -> List[Mlp]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as e:
        raise ModelFileError(path, f"cannot read model: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise ModelFileError(path, f"not a JSON document (line {e.lineno})") from e

    try:
        document = ModelFile.model_validate(raw)
    except ValidationError as e:
        raise ModelFileError(path, f"invalid model file: {e.errors()[0]['msg']}") from e

    networks = []
    for params in document.networks:
        try:
            networks.append(
                Mlp(
                    params.layer_dims,
                    [np.array(layer.weights, dtype=np.float64).reshape(d_in, d_out)
                     for layer, d_in, d_out in zip(params.layers, params.layer_dims[:-1], params.layer_dims[1:])],
                    [np.array(layer.biases, dtype=np.float64) for layer in params.layers],
                    seed=params.seed,
                )
            )
        except (ShapeError, ValueError) as e:
            raise ModelFileError(path, f"inconsistent parameters: {e}") from e
    return networks
