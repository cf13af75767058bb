"""
Radio service - noise floor, per-RB SINRs for the uplink-reuse scenario and
Shannon throughput.

CUE k owns RB k. A D2D transmitter interferes with the CUE uplink at the BS,
and the co-channel CUE plus every other D2D transmitter on the same RB
interfere at the D2D receiver.
"""
import logging
from typing import Union

import numpy as np

from core.exceptions import DomainError, ShapeError
from models.cell import GainTable
from models.radio import PowerAllocation, RadioConfig, ReuseAssignment, SinrReport

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def dbm_to_watt(p_dbm: ArrayLike) -> ArrayLike:
    p = np.asarray(p_dbm, dtype=float)
    if not np.all(np.isfinite(p)):
        raise DomainError(f"power must be finite, got {p_dbm}")
    watts = np.power(10.0, (p - 30.0) / 10.0)
    return float(watts) if watts.ndim == 0 else watts


def watt_to_dbm(p_w: ArrayLike) -> ArrayLike:
    p = np.asarray(p_w, dtype=float)
    if not np.all(np.isfinite(p)) or np.any(p <= 0):
        raise DomainError(f"power must be positive and finite to convert to dBm, got {p_w}")
    dbm = 10.0 * np.log10(p) + 30.0
    return float(dbm) if dbm.ndim == 0 else dbm


def noise_power_w(config: RadioConfig) -> float:
    """Thermal noise over one RB: density (dBm/Hz) integrated over the RB bandwidth."""
    return dbm_to_watt(config.noise_density_dbm_hz + 10.0 * np.log10(config.rb_bandwidth_hz))


def _check_shapes(alloc: PowerAllocation, gains: GainTable, reuse: ReuseAssignment):
    num_cues, num_pairs = gains.num_cues, gains.num_d2d_pairs
    if alloc.cue_power_w.shape != (num_cues,) or alloc.d2d_power_w.shape != (num_pairs,):
        raise ShapeError(
            f"allocation shapes {alloc.cue_power_w.shape}/{alloc.d2d_power_w.shape} "
            f"do not match {num_cues} CUEs and {num_pairs} D2D pairs"
        )
    if reuse.x.shape != (num_pairs, num_cues):
        raise ShapeError(f"reuse matrix shape {reuse.x.shape} does not match ({num_pairs}, {num_cues})")


def cue_sinr(rb: int, alloc: PowerAllocation, gains: GainTable, reuse: ReuseAssignment, noise_w: float) -> float:
    """Uplink SINR at the BS of the CUE owning RB rb."""
    _check_shapes(alloc, gains, reuse)
    if not 0 <= rb < gains.num_cues:
        raise DomainError(f"RB index {rb} out of range [0, {gains.num_cues})")
    signal = alloc.cue_power_w[rb] * gains.g_cue_bs[rb]
    interference = float(np.sum(reuse.x[:, rb] * alloc.d2d_power_w * gains.g_d2dtx_bs))
    return float(signal / (noise_w + interference))


def d2d_sinr(pair: int, alloc: PowerAllocation, gains: GainTable, reuse: ReuseAssignment, noise_w: float) -> float:
    """SINR at the receiver of D2D pair `pair` on the RB it reuses."""
    _check_shapes(alloc, gains, reuse)
    if not 0 <= pair < gains.num_d2d_pairs:
        raise DomainError(f"D2D pair index {pair} out of range [0, {gains.num_d2d_pairs})")
    rb = int(reuse.rb_of_pair[pair])
    signal = alloc.d2d_power_w[pair] * gains.g_d2d_link[pair]
    cue_interference = alloc.cue_power_w[rb] * gains.g_cue_d2drx[rb, pair]
    co_channel = reuse.x[:, rb].astype(float)
    co_channel[pair] = 0.0
    d2d_interference = float(np.sum(co_channel * alloc.d2d_power_w * gains.g_d2dtx_d2drx[:, pair]))
    return float(signal / (noise_w + cue_interference + d2d_interference))


def compute_sinr_report(alloc: PowerAllocation, gains: GainTable, reuse: ReuseAssignment, noise_w: float) -> SinrReport:
    """Vectorised cue_sinr over every RB and d2d_sinr over every pair."""
    _check_shapes(alloc, gains, reuse)
    x = reuse.x.astype(float)
    p_d = alloc.d2d_power_w

    interference_at_bs = x.T @ (p_d * gains.g_d2dtx_bs)
    cue = alloc.cue_power_w * gains.g_cue_bs / (noise_w + interference_at_bs)

    num_pairs = gains.num_d2d_pairs
    if num_pairs == 0:
        return SinrReport(cue_sinr_lin=cue, d2d_sinr_lin=np.zeros(0))

    rb = reuse.rb_of_pair
    pairs = np.arange(num_pairs)
    cue_interference = alloc.cue_power_w[rb] * gains.g_cue_d2drx[rb, pairs]
    # same_rb[i, j] = 1 when transmitter i shares receiver j's RB, i != j
    same_rb = x @ x.T
    np.fill_diagonal(same_rb, 0.0)
    d2d_interference = np.sum(same_rb * (p_d[:, None] * gains.g_d2dtx_d2drx), axis=0)
    d2d = p_d * gains.g_d2d_link / (noise_w + cue_interference + d2d_interference)
    return SinrReport(cue_sinr_lin=cue, d2d_sinr_lin=d2d)


def system_throughput(report: SinrReport) -> float:
    """Sum spectral efficiency in bit/s/Hz over CUE and D2D links."""
    return float(np.sum(np.log2(1.0 + report.cue_sinr_lin)) + np.sum(np.log2(1.0 + report.d2d_sinr_lin)))


def d2d_throughput(report: SinrReport) -> float:
    return float(np.sum(np.log2(1.0 + report.d2d_sinr_lin)))
