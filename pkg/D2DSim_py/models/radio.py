"""
Radio models - link budget configuration, power allocations, reuse matrix and SINR reports
"""
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.exceptions import DomainError, ShapeError


class RadioConfig(BaseModel):
    """Link budget: thermal noise density, RB bandwidth and p_max."""
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    noise_density_dbm_hz: float = -176.0
    rb_bandwidth_hz: float = Field(default=180e3, gt=0)
    p_max_dbm: float = 23.0
    cue_tx_power_dbm: float = 23.0
    # lower bound of the CUE power draw when randomize_cue_power is on
    cue_power_min_dbm: float = 0.0
    randomize_cue_power: bool = False

    @field_validator("cue_tx_power_dbm")
    @classmethod
    def _cue_power_within_limit(cls, value: float, info):
        p_max = info.data.get("p_max_dbm")
        if p_max is not None and value > p_max:
            raise ValueError(f"cue_tx_power_dbm ({value}) exceeds p_max_dbm ({p_max})")
        return value

    @field_validator("cue_power_min_dbm")
    @classmethod
    def _cue_power_range(cls, value: float, info):
        upper = info.data.get("cue_tx_power_dbm")
        if upper is not None and value > upper:
            raise ValueError(f"cue_power_min_dbm ({value}) exceeds cue_tx_power_dbm ({upper})")
        return value


@dataclass(frozen=True)
class PowerAllocation:
    """Transmit power in watts for every CUE (one per RB) and every D2D transmitter."""
    cue_power_w: np.ndarray      # (C,)
    d2d_power_w: np.ndarray      # (D,)

    def __post_init__(self):
        for name in ("cue_power_w", "d2d_power_w"):
            values = np.asarray(getattr(self, name), dtype=float)
            if values.ndim != 1:
                raise ShapeError(f"{name} must be one-dimensional, got shape {values.shape}")
            if not np.all(np.isfinite(values)) or np.any(values < 0):
                raise DomainError(f"{name} entries must be finite and non-negative")
            object.__setattr__(self, name, values)

    def exceeds(self, p_max_w: float, rtol: float = 1e-9) -> bool:
        """Any entry above p_max, ignoring dBm round-off."""
        limit = p_max_w * (1.0 + rtol)
        return bool(np.any(self.cue_power_w > limit) or np.any(self.d2d_power_w > limit))


@dataclass(frozen=True)
class ReuseAssignment:
    """x[i, k] = 1 iff D2D pair i reuses the RB owned by CUE k."""
    x: np.ndarray                # (D, C)

    def __post_init__(self):
        x = np.asarray(self.x)
        if x.ndim != 2:
            raise ShapeError(f"reuse matrix must be two-dimensional, got shape {x.shape}")
        if not np.all((x == 0) | (x == 1)):
            raise DomainError("reuse matrix entries must be 0 or 1")
        if x.shape[0] and not np.all(x.sum(axis=1) == 1):
            raise DomainError("every D2D pair must reuse exactly one RB")
        object.__setattr__(self, "x", x.astype(np.int8))

    @classmethod
    def from_rb_indices(cls, rb_of_pair: np.ndarray, num_rbs: int) -> "ReuseAssignment":
        rb_of_pair = np.asarray(rb_of_pair, dtype=int)
        if rb_of_pair.size and (rb_of_pair.min() < 0 or rb_of_pair.max() >= num_rbs):
            raise DomainError(f"RB indices must lie in [0, {num_rbs})")
        x = np.zeros((rb_of_pair.size, num_rbs), dtype=np.int8)
        x[np.arange(rb_of_pair.size), rb_of_pair] = 1
        return cls(x)

    @property
    def rb_of_pair(self) -> np.ndarray:
        return np.argmax(self.x, axis=1) if self.x.shape[0] else np.zeros(0, dtype=int)

    @property
    def shared_rbs(self) -> np.ndarray:
        """Boolean mask over RBs that carry at least one D2D pair."""
        return self.x.sum(axis=0) > 0


@dataclass(frozen=True)
class SinrReport:
    cue_sinr_lin: np.ndarray     # (C,)
    d2d_sinr_lin: np.ndarray     # (D,)
