"""
Deep Q-learning service - TD targets, epsilon-greedy selection and one
replay-driven learning step, plus the network/optimizer/memory bundle an
agent (or a group of agents sharing parameters) trains.
"""
import logging
from typing import Optional, Union

import numpy as np

from core.exceptions import DomainError, ReplayNotReadyError
from models.agent import RlConfig
from services.adam_optimizer import AdamState, adam_step
from services.q_network import Mlp, loss_and_gradients, mlp_forward
from services.replay_memory import ReplayMemory, Transition, stack_transitions

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def td_target(reward: ArrayLike, max_next_q: ArrayLike, discount: float) -> ArrayLike:
    """y = r + discount * max_a Q(S_{t+1}, a). The task is continuing, so every target bootstraps."""
    if not 0.0 <= discount <= 1.0:
        raise DomainError(f"discount must lie in [0, 1], got {discount}")
    y = np.asarray(reward, dtype=np.float64) + discount * np.asarray(max_next_q, dtype=np.float64)
    return float(y) if y.ndim == 0 else y


def greedy_action(q: np.ndarray) -> int:
    """Argmax; np.argmax returns the first maximum, so the lowest index wins ties."""
    q = np.asarray(q)
    if q.size == 0:
        raise DomainError("q-values must not be empty")
    return int(np.argmax(q))


def epsilon_greedy(q: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    """Uniform random action with probability epsilon, else the greedy action."""
    q = np.asarray(q)
    if q.size == 0:
        raise DomainError("q-values must not be empty")
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(q.size))
    return greedy_action(q)


def train_step(
    net: Mlp,
    opt: AdamState,
    mem: ReplayMemory,
    batch_size: int,
    discount: float,
    rng: np.random.Generator,
    target_net: Optional[Mlp] = None,
) -> float:
    """Sample a batch, regress Q(S, a) toward the TD target, apply one Adam step.

    Returns the loss measured before the update. Raises ReplayNotReadyError when
    the memory is not warm yet.
    """
    batch = mem.sample(batch_size, rng)
    states, actions, rewards, next_states = stack_transitions(batch)

    bootstrap = target_net if target_net is not None else net
    max_next_q = mlp_forward(bootstrap, next_states).max(axis=1)
    targets = td_target(rewards, max_next_q, discount)

    loss, grads = loss_and_gradients(net, states, actions, targets)
    adam_step(opt, net.parameters(), grads)
    if not net.all_finite():
        raise DomainError(f"network parameters became non-finite after step {opt.step_count}")
    return loss


class DqnLearner:
    """One network with its optimizer and replay memory; mutated by a single training thread."""

    def __init__(self, net: Mlp, rl: RlConfig):
        self.net = net
        self.rl = rl
        self.opt = AdamState.for_parameters(
            net.parameters(), lr=rl.learning_rate, beta1=rl.adam_beta1, beta2=rl.adam_beta2, eps=rl.adam_eps
        )
        self.memory = ReplayMemory(rl.replay_capacity)
        self.target_net = net.copy() if rl.target_sync_interval > 0 else None
        self.learn_steps = 0

    @classmethod
    def build(cls, state_dim: int, num_actions: int, rl: RlConfig, seed: int) -> "DqnLearner":
        return cls(Mlp.build(state_dim, rl.hidden_layers, num_actions, seed), rl)

    def act(self, state: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
        return epsilon_greedy(mlp_forward(self.net, state), epsilon, rng)

    def remember(self, transition: Transition):
        self.memory.push(transition)

    def learn(self, rng: np.random.Generator) -> Optional[float]:
        """One train_step; None while the memory holds fewer than batch_size transitions."""
        try:
            loss = train_step(
                self.net, self.opt, self.memory, self.rl.batch_size, self.rl.discount, rng, self.target_net
            )
        except ReplayNotReadyError:
            return None
        self.learn_steps += 1
        if self.target_net is not None and self.learn_steps % self.rl.target_sync_interval == 0:
            self.target_net.load_parameters(self.net)
        return loss
