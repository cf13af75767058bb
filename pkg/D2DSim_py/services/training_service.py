"""
Training and evaluation service - the DQN training loop over random
topologies and the greedy / baseline evaluation loop.
"""
import logging
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.exceptions import ShapeError
from models.agent import AgentState, EvaluationMetrics, Scenario
from models.experiment import ExperimentConfig
from services.dqn_service import DqnLearner, epsilon_greedy, greedy_action
from services.power_control_service import (
    actions_to_powers,
    env_step,
    max_power_policy,
    olpc_policy,
    qos_satisfied,
    reset_state,
    step_with_powers,
)
from services.q_network import Mlp, mlp_forward
from services.radio_service import d2d_throughput, noise_power_w, system_throughput
from services.replay_memory import Transition
from services.topology_service import draw_scenario

logger = logging.getLogger(__name__)

# maps (scenario, current observation) -> D2D transmit powers in watts
PowerPolicy = Callable[[Scenario, AgentState], np.ndarray]

HISTORY_COLUMNS = ["episode", "mean_reward", "mean_loss", "qos_violation_rate"]


@dataclass
class TrainingResult:
    learners: List[DqnLearner]
    history: pd.DataFrame
    shared: bool
    seed: int

    @property
    def networks(self) -> List[Mlp]:
        return [learner.net for learner in self.learners]

    @property
    def network(self) -> Mlp:
        return self.learners[0].net


def draw_scenarios(config: ExperimentConfig, rng: np.random.Generator, count: int) -> List[Scenario]:
    return [draw_scenario(config.cell, config.radio, rng) for _ in range(count)]


def _build_learners(config: ExperimentConfig, seed: int) -> List[DqnLearner]:
    state_dim = config.cell.num_cues
    num_actions = config.actions.num_power_levels
    if config.rl.shared_network or config.cell.num_d2d_pairs == 0:
        return [DqnLearner.build(state_dim, num_actions, config.rl, seed)]
    return [
        DqnLearner.build(state_dim, num_actions, config.rl, seed + i)
        for i in range(config.cell.num_d2d_pairs)
    ]


def train(
    config: ExperimentConfig,
    rng: np.random.Generator,
    scenarios: Optional[Sequence[Scenario]] = None,
) -> TrainingResult:
    """Multi-agent DQN training.

    Every episode uses a fresh random topology (or cycles through `scenarios`
    when given). At each step every agent picks a power level epsilon-greedily
    from the broadcast state, the environment advances once, each agent's
    transition goes into its learner's replay memory, and each learner runs one
    train_step once its memory is warm.
    """
    num_pairs = config.cell.num_d2d_pairs
    if scenarios is not None:
        if not scenarios:
            raise ShapeError("scenario list must not be empty")
        if any(sc.num_d2d_pairs != num_pairs or sc.num_cues != config.cell.num_cues for sc in scenarios):
            raise ShapeError(f"training scenarios must hold {config.cell.num_cues} CUEs and {num_pairs} D2D pairs")

    seed = int(rng.integers(0, 2 ** 63 - 1))
    learners = _build_learners(config, seed)
    shared = len(learners) == 1
    noise_w = noise_power_w(config.radio)
    epsilon = config.rl.epsilon
    episodes = config.env.episodes
    log_every = max(1, episodes // 10)

    history = []
    start_time = time.time()
    for episode in range(episodes):
        scenario = scenarios[episode % len(scenarios)] if scenarios is not None else draw_scenario(config.cell, config.radio, rng)
        state = reset_state(scenario, noise_w)
        rewards, losses = [], []

        for _ in range(config.env.steps_per_episode):
            q_values = [mlp_forward(learner.net, state.values) for learner in learners]
            actions = np.array(
                [epsilon_greedy(q_values[0 if shared else i], epsilon, rng) for i in range(num_pairs)],
                dtype=int,
            )
            step = env_step(scenario, actions, config, noise_w)

            for i in range(num_pairs):
                learner = learners[0 if shared else i]
                learner.remember(Transition(state.values, int(actions[i]), float(step.rewards[i]), step.next_state.values))
            for learner in learners:
                loss = learner.learn(rng)
                if loss is not None:
                    losses.append(loss)

            rewards.extend(step.rewards.tolist())
            state = step.next_state

        rewards_arr = np.asarray(rewards)
        history.append({
            "episode": episode,
            "mean_reward": float(rewards_arr.mean()) if rewards_arr.size else float("nan"),
            "mean_loss": float(np.mean(losses)) if losses else float("nan"),
            "qos_violation_rate": float(np.mean(rewards_arr == -1.0)) if rewards_arr.size else float("nan"),
        })
        logger.debug(f"episode {episode}: reward {history[-1]['mean_reward']:.3f} loss {history[-1]['mean_loss']:.4f}")
        if (episode + 1) % log_every == 0:
            logger.info(
                f"🔄 Training D={num_pairs}: episode {episode + 1}/{episodes}, "
                f"mean reward {history[-1]['mean_reward']:.3f}, "
                f"QoS violations {history[-1]['qos_violation_rate']:.1%}"
            )

    if episodes:
        logger.info(f"✅ Training finished: {episodes} episodes in {time.time() - start_time:.2f}s")
    return TrainingResult(
        learners=learners,
        history=pd.DataFrame(history, columns=HISTORY_COLUMNS),
        shared=shared,
        seed=seed,
    )


def evaluate_policy(
    policy: PowerPolicy,
    scenarios: Sequence[Scenario],
    config: ExperimentConfig,
    noise_w: Optional[float] = None,
) -> EvaluationMetrics:
    """Run eval_steps per scenario and average system throughput, D2D throughput and CUE QoS rate."""
    if noise_w is None:
        noise_w = noise_power_w(config.radio)
    tau = config.env.tau_db
    system_total, d2d_total, steps = 0.0, 0.0, 0
    qos_hits, qos_total = 0, 0

    for scenario in scenarios:
        state = reset_state(scenario, noise_w)
        shared_rbs = scenario.reuse.shared_rbs
        for _ in range(config.env.eval_steps):
            step = step_with_powers(scenario, policy(scenario, state), config, noise_w)
            system_total += system_throughput(step.report)
            d2d_total += d2d_throughput(step.report)
            steps += 1
            if shared_rbs.any():
                qos_hits += int(np.count_nonzero(qos_satisfied(step.report.cue_sinr_lin[shared_rbs], tau)))
                qos_total += int(np.count_nonzero(shared_rbs))
            state = step.next_state

    if steps == 0:
        raise ShapeError("evaluation needs at least one scenario")
    return EvaluationMetrics(
        system_throughput_bps_hz=system_total / steps,
        d2d_throughput_bps_hz=d2d_total / steps,
        # no RB is shared when D = 0, so every CUE is trivially served
        cue_qos_rate=qos_hits / qos_total if qos_total else 1.0,
    )


def dqn_policy(networks: Sequence[Mlp], config: ExperimentConfig) -> PowerPolicy:
    """Greedy (epsilon = 0) power selection; one shared network or one network per agent."""
    space = config.action_space
    num_pairs = config.cell.num_d2d_pairs
    for net in networks:
        if net.input_dim != config.cell.num_cues or net.output_dim != space.num_levels:
            raise ShapeError(
                f"network maps {net.input_dim} -> {net.output_dim} but the cell needs "
                f"{config.cell.num_cues} -> {space.num_levels}"
            )
    if len(networks) not in (1, num_pairs):
        raise ShapeError(f"{len(networks)} networks for {num_pairs} agents")

    def policy(scenario: Scenario, state: AgentState) -> np.ndarray:
        if len(networks) == 1:
            action = greedy_action(mlp_forward(networks[0], state.values))
            actions = np.full(scenario.num_d2d_pairs, action, dtype=int)
        else:
            actions = np.array([greedy_action(mlp_forward(net, state.values)) for net in networks], dtype=int)
        return actions_to_powers(actions, space)

    return policy


def max_power_baseline(config: ExperimentConfig) -> PowerPolicy:
    def policy(scenario: Scenario, state: AgentState) -> np.ndarray:
        return max_power_policy(scenario.num_d2d_pairs, config.radio.p_max_dbm)
    return policy


def olpc_baseline(config: ExperimentConfig) -> PowerPolicy:
    def policy(scenario: Scenario, state: AgentState) -> np.ndarray:
        return olpc_policy(scenario.gains, scenario.topology, config)
    return policy


def evaluate(networks: Sequence[Mlp], scenarios: Sequence[Scenario], config: ExperimentConfig) -> EvaluationMetrics:
    """Greedy DQN evaluation on fixed topologies; side-effect free."""
    return evaluate_policy(dqn_policy(networks, config), scenarios, config)
