import numpy as np
import pytest

from models.agent import ActionSpaceConfig, EnvConfig, RlConfig, Scenario
from models.cell import CellConfig, GainTable, Topology
from models.experiment import ExperimentConfig
from models.radio import ReuseAssignment
from services.radio_service import dbm_to_watt
from services.topology_service import build_gain_table


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def small_config():
    """4 CUEs, 2 pairs, tiny network and short episodes."""
    return ExperimentConfig(
        cell=CellConfig(num_cues=4, num_d2d_pairs=2),
        env=EnvConfig(episodes=3, steps_per_episode=5, eval_steps=3, eval_topologies=4),
        actions=ActionSpaceConfig(num_power_levels=4),
        rl=RlConfig(hidden_layers=[16, 16], batch_size=4, replay_capacity=200),
        d2d_counts=[2],
        seeds=[0],
    )


@pytest.fixture
def scenario_from_positions():
    """Build a Scenario from explicit node positions with shadowing off."""

    def build(cue_pos, tx_pos, rx_pos, rb_of_pair, cell=None, cue_power_dbm=23.0):
        cue_pos = np.asarray(cue_pos, dtype=float).reshape(-1, 2)
        tx_pos = np.asarray(tx_pos, dtype=float).reshape(-1, 2)
        rx_pos = np.asarray(rx_pos, dtype=float).reshape(-1, 2)
        rb_of_pair = np.asarray(rb_of_pair, dtype=int)
        cell = cell or CellConfig(num_cues=len(cue_pos), num_d2d_pairs=len(tx_pos))
        topology = Topology(cue_pos=cue_pos, d2d_tx_pos=tx_pos, d2d_rx_pos=rx_pos, rb_of_pair=rb_of_pair)
        return Scenario(
            topology=topology,
            gains=build_gain_table(topology, cell),
            reuse=ReuseAssignment.from_rb_indices(rb_of_pair, len(cue_pos)),
            cue_power_w=np.full(len(cue_pos), dbm_to_watt(cue_power_dbm)),
        )

    return build


@pytest.fixture
def gain_fixture():
    """3 CUEs, 2 pairs both reusing RB 1, hand-picked gains."""
    gains = GainTable(
        g_cue_bs=np.array([1e-9, 2e-9, 3e-9]),
        g_d2dtx_bs=np.array([1e-11, 4e-11]),
        g_d2d_link=np.array([1e-7, 2e-7]),
        g_cue_d2drx=np.array([[1e-10, 2e-10], [3e-10, 4e-10], [5e-10, 6e-10]]),
        g_d2dtx_d2drx=np.array([[1e-7, 5e-9], [7e-9, 2e-7]]),
    )
    reuse = ReuseAssignment.from_rb_indices(np.array([1, 1]), 3)
    return gains, reuse
