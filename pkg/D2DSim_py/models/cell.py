"""
Cell geometry models - configuration, node placement and link gains
"""
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class CellConfig(BaseModel):
    """Single-cell geometry and antenna parameters (17 dBi BS, 4 dBi UE, 30 CUEs)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    cell_radius_m: float = Field(default=500.0, gt=0)
    d2d_max_dist_m: float = Field(default=50.0, gt=0)
    num_cues: int = Field(default=30, ge=1)
    num_d2d_pairs: int = Field(default=10, ge=0)
    bs_antenna_gain_dbi: float = 17.0
    ue_antenna_gain_dbi: float = 4.0
    shadowing_sigma_db: float = Field(default=0.0, ge=0)
    # floor applied to every link distance before the path-loss models
    min_dist_m: float = Field(default=10.0, ge=0)

    @field_validator("d2d_max_dist_m")
    @classmethod
    def _pair_distance_inside_cell(cls, value: float, info):
        radius = info.data.get("cell_radius_m")
        if radius is not None and value >= radius:
            raise ValueError(f"d2d_max_dist_m ({value}) must be smaller than cell_radius_m ({radius})")
        return value

    @property
    def min_dist_km(self) -> float:
        return self.min_dist_m / 1000.0


@dataclass(frozen=True)
class Topology:
    """Node positions in meters; the BS sits at the origin."""
    cue_pos: np.ndarray          # (C, 2)
    d2d_tx_pos: np.ndarray       # (D, 2)
    d2d_rx_pos: np.ndarray       # (D, 2)
    rb_of_pair: np.ndarray       # (D,) RB reused by each pair
    bs_pos: np.ndarray = None    # (2,)

    def __post_init__(self):
        if self.bs_pos is None:
            object.__setattr__(self, "bs_pos", np.zeros(2))

    @property
    def num_cues(self) -> int:
        return int(self.cue_pos.shape[0])

    @property
    def num_d2d_pairs(self) -> int:
        return int(self.d2d_tx_pos.shape[0])


@dataclass(frozen=True)
class GainTable:
    """Linear channel gains, antenna gains and shadowing included."""
    g_cue_bs: np.ndarray         # (C,)
    g_d2dtx_bs: np.ndarray       # (D,)
    g_d2d_link: np.ndarray       # (D,)
    g_cue_d2drx: np.ndarray      # (C, D)
    g_d2dtx_d2drx: np.ndarray    # (D, D)  [i, j] = Tx_i -> Rx_j

    @property
    def num_cues(self) -> int:
        return int(self.g_cue_bs.shape[0])

    @property
    def num_d2d_pairs(self) -> int:
        return int(self.g_d2dtx_bs.shape[0])
