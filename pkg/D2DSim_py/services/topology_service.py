"""
Cell topology service - random node placement and deterministic link gains
built from the urban macro-cell propagation models.
"""
import logging
from typing import Optional, Union

import numpy as np

from core.exceptions import DomainError
from models.agent import Scenario
from models.cell import CellConfig, GainTable, Topology
from models.radio import RadioConfig, ReuseAssignment
from services.radio_service import dbm_to_watt

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

DEFAULT_MIN_DIST_KM = 0.01


def _uniform_disk(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


def place_nodes(config: CellConfig, rng: np.random.Generator) -> Topology:
    """Drop CUEs and D2D transmitters uniformly over the cell, receivers around their transmitter."""
    num_cues, num_pairs = config.num_cues, config.num_d2d_pairs

    cue_pos = _uniform_disk(rng, num_cues, config.cell_radius_m)
    tx_pos = _uniform_disk(rng, num_pairs, config.cell_radius_m)

    rx_pos = np.empty((num_pairs, 2))
    for i in range(num_pairs):
        # receivers falling outside the cell are redrawn
        while True:
            candidate = tx_pos[i] + _uniform_disk(rng, 1, config.d2d_max_dist_m)[0]
            if np.hypot(candidate[0], candidate[1]) <= config.cell_radius_m:
                break
        rx_pos[i] = candidate

    if num_pairs <= num_cues:
        rb_of_pair = rng.permutation(num_cues)[:num_pairs]
    else:
        logger.debug(f"{num_pairs} D2D pairs on {num_cues} RBs - RBs are shared between pairs")
        rb_of_pair = rng.integers(0, num_cues, size=num_pairs)

    return Topology(
        cue_pos=cue_pos,
        d2d_tx_pos=tx_pos,
        d2d_rx_pos=rx_pos,
        rb_of_pair=np.asarray(rb_of_pair, dtype=int),
    )


def _floored_distance(d_km: ArrayLike, min_dist_km: float) -> np.ndarray:
    d = np.asarray(d_km, dtype=float)
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise DomainError(f"link distance must be finite and non-negative, got {d_km}")
    d = np.maximum(d, min_dist_km)
    if np.any(d <= 0):
        raise DomainError("link distance must be positive after flooring")
    return d


def _as_output(values: np.ndarray) -> ArrayLike:
    return float(values) if np.ndim(values) == 0 else values


def pathloss_bs_user(d_km: ArrayLike, min_dist_km: float = DEFAULT_MIN_DIST_KM) -> ArrayLike:
    """BS <-> user path loss in dB: 15.3 + 36.6 log10(d[km])."""
    d = _floored_distance(d_km, min_dist_km)
    return _as_output(15.3 + 36.6 * np.log10(d))


def pathloss_user_user(d_km: ArrayLike, min_dist_km: float = DEFAULT_MIN_DIST_KM) -> ArrayLike:
    """User <-> user path loss in dB: 28 + 40 log10(d[km])."""
    d = _floored_distance(d_km, min_dist_km)
    return _as_output(28.0 + 40.0 * np.log10(d))


def link_gain(pl_db: ArrayLike, shadow_db: ArrayLike, tx_gain_dbi: float, rx_gain_dbi: float) -> ArrayLike:
    """Linear gain 10^((G_tx + G_rx - PL - shadowing) / 10)."""
    exponent = (tx_gain_dbi + rx_gain_dbi - np.asarray(pl_db, dtype=float) - np.asarray(shadow_db, dtype=float)) / 10.0
    return _as_output(np.power(10.0, exponent))


def _shadowing(rng: Optional[np.random.Generator], sigma_db: float, shape) -> np.ndarray:
    if sigma_db == 0:
        return np.zeros(shape)
    return rng.normal(0.0, sigma_db, size=shape)


def build_gain_table(topology: Topology, config: CellConfig, rng: Optional[np.random.Generator] = None) -> GainTable:
    """Gains for every link in the cell. The rng is only consumed when shadowing is enabled."""
    sigma = config.shadowing_sigma_db
    if sigma > 0 and rng is None:
        raise DomainError("a random source is required when shadowing_sigma_db > 0")

    floor_km = config.min_dist_km
    g_bs, g_ue = config.bs_antenna_gain_dbi, config.ue_antenna_gain_dbi
    bs = topology.bs_pos
    cue, tx, rx = topology.cue_pos, topology.d2d_tx_pos, topology.d2d_rx_pos

    d_cue_bs = np.linalg.norm(cue - bs, axis=1) / 1000.0
    d_tx_bs = np.linalg.norm(tx - bs, axis=1) / 1000.0
    d_cue_rx = np.linalg.norm(cue[:, None, :] - rx[None, :, :], axis=2) / 1000.0
    d_tx_rx = np.linalg.norm(tx[:, None, :] - rx[None, :, :], axis=2) / 1000.0

    g_cue_bs = link_gain(pathloss_bs_user(d_cue_bs, floor_km), _shadowing(rng, sigma, d_cue_bs.shape), g_ue, g_bs)
    g_d2dtx_bs = link_gain(pathloss_bs_user(d_tx_bs, floor_km), _shadowing(rng, sigma, d_tx_bs.shape), g_ue, g_bs)
    g_cue_d2drx = link_gain(pathloss_user_user(d_cue_rx, floor_km), _shadowing(rng, sigma, d_cue_rx.shape), g_ue, g_ue)
    g_d2dtx_d2drx = link_gain(pathloss_user_user(d_tx_rx, floor_km), _shadowing(rng, sigma, d_tx_rx.shape), g_ue, g_ue)

    return GainTable(
        g_cue_bs=g_cue_bs,
        g_d2dtx_bs=g_d2dtx_bs,
        # own link is the diagonal of the Tx -> Rx matrix, one shadowing draw per link
        g_d2d_link=np.diagonal(g_d2dtx_d2drx).copy(),
        g_cue_d2drx=g_cue_d2drx,
        g_d2dtx_d2drx=g_d2dtx_d2drx,
    )


def draw_cue_powers(radio: RadioConfig, num_cues: int, rng: np.random.Generator) -> np.ndarray:
    if not radio.randomize_cue_power:
        return np.full(num_cues, dbm_to_watt(radio.cue_tx_power_dbm))
    powers_dbm = rng.uniform(radio.cue_power_min_dbm, radio.cue_tx_power_dbm, size=num_cues)
    return np.asarray(dbm_to_watt(powers_dbm))


def draw_scenario(cell: CellConfig, radio: RadioConfig, rng: np.random.Generator) -> Scenario:
    """Topology, gains, reuse matrix and CUE powers for one episode or evaluation draw."""
    topology = place_nodes(cell, rng)
    gains = build_gain_table(topology, cell, rng)
    reuse = ReuseAssignment.from_rb_indices(topology.rb_of_pair, topology.num_cues)
    cue_power_w = draw_cue_powers(radio, topology.num_cues, rng)
    return Scenario(topology=topology, gains=gains, reuse=reuse, cue_power_w=cue_power_w)
