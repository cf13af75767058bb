"""
Power control service - the multi-agent MDP over one cell: the broadcast CUE
SINR observation, the QoS-gated throughput reward, the D2D power grid, one
environment step, and the Max-Power / Open-Loop baselines.
"""
import logging
from typing import Optional

import numpy as np

from core.exceptions import DomainError, ShapeError
from models.agent import (
    SINR_CEILING_DB,
    SINR_FLOOR_DB,
    ActionSpace,
    AgentState,
    Scenario,
    StepResult,
)
from models.cell import GainTable, Topology
from models.experiment import ExperimentConfig
from models.radio import PowerAllocation, SinrReport
from services.radio_service import compute_sinr_report, dbm_to_watt, noise_power_w

logger = logging.getLogger(__name__)

SINR_CEILING_LIN = 10.0 ** (SINR_CEILING_DB / 10.0)


def sinr_to_db(sinr_lin: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(sinr_lin, dtype=float))


def observe_state(report: SinrReport) -> AgentState:
    """CUE SINRs in dB, clamped to [-30, 50] and mapped affinely onto [0, 1]."""
    clamped = np.clip(sinr_to_db(report.cue_sinr_lin), SINR_FLOOR_DB, SINR_CEILING_DB)
    return AgentState(values=(clamped - SINR_FLOOR_DB) / (SINR_CEILING_DB - SINR_FLOOR_DB))


def qos_satisfied(gamma_c_lin, tau_db: float):
    """CUE SINR meets the threshold; equality counts as satisfied."""
    return sinr_to_db(gamma_c_lin) >= tau_db


def reward(gamma_c_lin: float, gamma_d_lin: float, tau_db: float) -> float:
    """Sum rate of the agent's RB when its CUE meets tau, otherwise -1.

    Both SINRs are capped at the observation ceiling before the log terms.
    """
    if gamma_c_lin < 0 or gamma_d_lin < 0:
        raise DomainError(f"SINRs must be non-negative, got {gamma_c_lin}, {gamma_d_lin}")
    if not qos_satisfied(gamma_c_lin, tau_db):
        return -1.0
    gamma_c = min(gamma_c_lin, SINR_CEILING_LIN)
    gamma_d = min(gamma_d_lin, SINR_CEILING_LIN)
    return float(np.log2(1.0 + gamma_c) + np.log2(1.0 + gamma_d))


def action_to_power(index: int, space: ActionSpace) -> float:
    if not 0 <= index < space.num_levels:
        raise DomainError(f"action index {index} out of range [0, {space.num_levels})")
    return dbm_to_watt(space.level_powers_dbm[index])


def actions_to_powers(joint_action: np.ndarray, space: ActionSpace) -> np.ndarray:
    joint_action = np.asarray(joint_action, dtype=int)
    if joint_action.size and (joint_action.min() < 0 or joint_action.max() >= space.num_levels):
        raise DomainError(f"action indices must lie in [0, {space.num_levels})")
    return np.asarray(dbm_to_watt(space.level_powers_dbm[joint_action]), dtype=float).reshape(joint_action.shape)


def max_power_policy(num_pairs: int, p_max_dbm: float = 23.0) -> np.ndarray:
    """Every D2D transmitter at p_max."""
    return np.full(num_pairs, dbm_to_watt(p_max_dbm))


def olpc_power_dbm(pathloss_db, p0_dbm: float, alpha: float, p_max_dbm: float):
    """LTE fractional open-loop rule P = min(p_max, P0 + alpha * PL)."""
    return np.minimum(p_max_dbm, p0_dbm + alpha * np.asarray(pathloss_db, dtype=float))


def olpc_policy(gains: GainTable, topology: Topology, config: ExperimentConfig) -> np.ndarray:
    """Each transmitter compensates the measured loss of its own link.

    The measured loss is the coupling loss with the known antenna gains removed,
    i.e. path loss plus shadowing.
    """
    if gains.num_d2d_pairs != topology.num_d2d_pairs:
        raise ShapeError(f"gain table has {gains.num_d2d_pairs} pairs, topology {topology.num_d2d_pairs}")
    if topology.num_d2d_pairs == 0:
        return np.zeros(0)
    antenna_db = 2.0 * config.cell.ue_antenna_gain_dbi
    measured_pl_db = antenna_db - 10.0 * np.log10(gains.g_d2d_link)
    powers_dbm = olpc_power_dbm(
        measured_pl_db, config.olpc.olpc_p0_dbm, config.olpc.olpc_alpha, config.radio.p_max_dbm
    )
    return np.asarray(dbm_to_watt(powers_dbm), dtype=float).reshape(-1)


def reset_state(scenario: Scenario, noise_w: float) -> AgentState:
    """Observation before any D2D transmitter is active."""
    silent = PowerAllocation(cue_power_w=scenario.cue_power_w, d2d_power_w=np.zeros(scenario.num_d2d_pairs))
    return observe_state(compute_sinr_report(silent, scenario.gains, scenario.reuse, noise_w))


def step_with_powers(scenario: Scenario, d2d_power_w: np.ndarray, config: ExperimentConfig, noise_w: Optional[float] = None) -> StepResult:
    if noise_w is None:
        noise_w = noise_power_w(config.radio)
    d2d_power_w = np.asarray(d2d_power_w, dtype=float)
    if d2d_power_w.shape != (scenario.num_d2d_pairs,):
        raise ShapeError(f"expected {scenario.num_d2d_pairs} D2D powers, got shape {d2d_power_w.shape}")

    alloc = PowerAllocation(cue_power_w=scenario.cue_power_w, d2d_power_w=d2d_power_w)
    if alloc.exceeds(dbm_to_watt(config.radio.p_max_dbm)):
        raise DomainError(f"transmit powers must not exceed p_max = {config.radio.p_max_dbm} dBm")
    report = compute_sinr_report(alloc, scenario.gains, scenario.reuse, noise_w)

    rb = scenario.reuse.rb_of_pair
    rewards = np.array(
        [
            reward(report.cue_sinr_lin[rb[i]], report.d2d_sinr_lin[i], config.env.tau_db)
            for i in range(scenario.num_d2d_pairs)
        ],
        dtype=float,
    )
    return StepResult(report=report, rewards=rewards, next_state=observe_state(report))


def env_step(scenario: Scenario, joint_action: np.ndarray, config: ExperimentConfig, noise_w: Optional[float] = None) -> StepResult:
    """Apply one power index per D2D pair (CUEs at their fixed power) and score every agent."""
    joint_action = np.asarray(joint_action, dtype=int)
    if joint_action.shape != (scenario.num_d2d_pairs,):
        raise ShapeError(f"expected one action per D2D pair ({scenario.num_d2d_pairs}), got shape {joint_action.shape}")
    powers = actions_to_powers(joint_action, config.action_space)
    return step_with_powers(scenario, powers, config, noise_w)
