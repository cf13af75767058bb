"""
Power-control agent models - MDP settings, action grid, learner hyperparameters,
per-topology scenarios and step/evaluation records
"""
from dataclasses import dataclass
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.exceptions import DomainError
from models.cell import GainTable, Topology
from models.radio import ReuseAssignment, SinrReport

# observation clamp range in dB
SINR_FLOOR_DB = -30.0
SINR_CEILING_DB = 50.0


class EnvConfig(BaseModel):
    """Episode structure and the CUE QoS threshold (tau = 6 dB in the reference setup)."""
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    tau_db: float = 6.0
    steps_per_episode: int = Field(default=20, ge=1)
    episodes: int = Field(default=300, ge=0)
    eval_steps: int = Field(default=20, ge=1)
    eval_topologies: int = Field(default=50, ge=1)


class ActionSpaceConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    num_power_levels: int = Field(default=10, ge=2)
    min_power_dbm: float = -10.0


class OlpcConfig(BaseModel):
    """LTE fractional open-loop power control: P = min(p_max, P0 + alpha * PL)."""
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    olpc_p0_dbm: float = -78.0
    olpc_alpha: float = Field(default=0.8, ge=0, le=1)


class RlConfig(BaseModel):
    """DQN hyperparameters: lr 0.001, discount 0.95, epsilon 0.1, 200-unit ReLU layers."""
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    hidden_layers: List[int] = Field(default_factory=lambda: [200, 200])
    learning_rate: float = Field(default=0.001, gt=0)
    adam_beta1: float = Field(default=0.9, ge=0, lt=1)
    adam_beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_eps: float = Field(default=1e-8, gt=0)
    discount: float = Field(default=0.95, ge=0, le=1)
    epsilon: float = Field(default=0.1, ge=0, le=1)
    replay_capacity: int = Field(default=10000, ge=1)
    batch_size: int = Field(default=32, ge=1)
    target_sync_interval: int = Field(default=0, ge=0)
    shared_network: bool = True

    @field_validator("hidden_layers")
    @classmethod
    def _positive_widths(cls, value: List[int]):
        if any(width < 1 for width in value):
            raise ValueError("hidden layer widths must be positive")
        return value

    @field_validator("batch_size")
    @classmethod
    def _batch_fits_memory(cls, value: int, info):
        capacity = info.data.get("replay_capacity")
        if capacity is not None and value > capacity:
            raise ValueError(f"batch_size ({value}) exceeds replay_capacity ({capacity})")
        return value


@dataclass(frozen=True)
class ActionSpace:
    """Evenly spaced transmit power grid in dBm; the last level is p_max."""
    level_powers_dbm: np.ndarray

    def __post_init__(self):
        levels = np.asarray(self.level_powers_dbm, dtype=float)
        if levels.ndim != 1 or levels.size < 2 or not np.all(np.diff(levels) > 0):
            raise DomainError("power levels must be a strictly increasing grid of at least two values")
        object.__setattr__(self, "level_powers_dbm", levels)

    @classmethod
    def build(cls, num_levels: int, min_power_dbm: float, max_power_dbm: float) -> "ActionSpace":
        if not min_power_dbm < max_power_dbm:
            raise DomainError(f"min_power_dbm ({min_power_dbm}) must be below max_power_dbm ({max_power_dbm})")
        return cls(np.linspace(min_power_dbm, max_power_dbm, num_levels))

    @property
    def num_levels(self) -> int:
        return int(self.level_powers_dbm.size)

    @property
    def min_power_dbm(self) -> float:
        return float(self.level_powers_dbm[0])

    @property
    def max_power_dbm(self) -> float:
        return float(self.level_powers_dbm[-1])


@dataclass(frozen=True)
class AgentState:
    """Broadcast CUE SINR vector, clamped to [-30, 50] dB and scaled to [0, 1]."""
    values: np.ndarray


@dataclass(frozen=True)
class Scenario:
    """One topology draw with everything an episode needs."""
    topology: Topology
    gains: GainTable
    reuse: ReuseAssignment
    cue_power_w: np.ndarray

    @property
    def num_d2d_pairs(self) -> int:
        return self.topology.num_d2d_pairs

    @property
    def num_cues(self) -> int:
        return self.topology.num_cues


@dataclass(frozen=True)
class StepResult:
    report: SinrReport
    rewards: np.ndarray          # (D,)
    next_state: AgentState


@dataclass(frozen=True)
class EvaluationMetrics:
    system_throughput_bps_hz: float
    d2d_throughput_bps_hz: float
    cue_qos_rate: float
