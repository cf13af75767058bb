"""
Experiment models - the sweep configuration and one result row per sweep cell
"""
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.exceptions import ConfigValidationError
from models.agent import ActionSpace, ActionSpaceConfig, EnvConfig, OlpcConfig, RlConfig
from models.cell import CellConfig
from models.radio import RadioConfig

ALGORITHMS = ("dqn", "max_power", "olpc")
Algorithm = Literal["dqn", "max_power", "olpc"]

RESULT_COLUMNS = [
    "algorithm",
    "d2d_count",
    "seed",
    "system_throughput_bps_hz",
    "d2d_throughput_bps_hz",
    "cue_qos_rate",
    "wall_time_s",
]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    cell: CellConfig = Field(default_factory=CellConfig)
    radio: RadioConfig = Field(default_factory=RadioConfig)
    env: EnvConfig = Field(default_factory=EnvConfig)
    actions: ActionSpaceConfig = Field(default_factory=ActionSpaceConfig)
    olpc: OlpcConfig = Field(default_factory=OlpcConfig)
    rl: RlConfig = Field(default_factory=RlConfig)

    algorithms: List[Algorithm] = Field(default_factory=lambda: list(ALGORITHMS))
    d2d_counts: List[int] = Field(default_factory=lambda: [2, 4, 6, 8, 10])
    seeds: List[int] = Field(default_factory=lambda: [0])
    output_path: str = "results.csv"
    model_dir: Optional[str] = None

    @field_validator("algorithms")
    @classmethod
    def _algorithms_unique(cls, value: List[str]):
        if not value:
            raise ValueError("at least one algorithm is required")
        if len(set(value)) != len(value):
            raise ValueError("algorithms must not repeat")
        return value

    @field_validator("d2d_counts")
    @classmethod
    def _counts_valid(cls, value: List[int]):
        if not value:
            raise ValueError("d2d_counts must not be empty")
        if any(count < 0 for count in value):
            raise ValueError("d2d_counts must be non-negative")
        return value

    @field_validator("seeds")
    @classmethod
    def _seeds_valid(cls, value: List[int]):
        if not value:
            raise ValueError("seeds must not be empty")
        if any(seed < 0 or seed >= 2 ** 64 for seed in value):
            raise ValueError("seeds must be unsigned 64-bit integers")
        return value

    @model_validator(mode="after")
    def _grid_below_pmax(self):
        if not self.actions.min_power_dbm < self.radio.p_max_dbm:
            raise ConfigValidationError(
                "min_power_dbm",
                f"{self.actions.min_power_dbm} dBm must be below p_max_dbm ({self.radio.p_max_dbm} dBm)",
            )
        return self

    @property
    def action_space(self) -> ActionSpace:
        return ActionSpace.build(
            self.actions.num_power_levels, self.actions.min_power_dbm, self.radio.p_max_dbm
        )

    def for_d2d_count(self, d2d_count: int) -> "ExperimentConfig":
        """Same experiment with the cell holding d2d_count pairs."""
        cell = self.cell.model_copy(update={"num_d2d_pairs": d2d_count})
        return self.model_copy(update={"cell": cell})


class ResultRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    algorithm: Algorithm
    d2d_count: int = Field(ge=0)
    seed: int = Field(ge=0)
    system_throughput_bps_hz: float = Field(ge=0)
    d2d_throughput_bps_hz: float = Field(ge=0)
    cue_qos_rate: float = Field(ge=0, le=1)
    wall_time_s: float = Field(ge=0)
