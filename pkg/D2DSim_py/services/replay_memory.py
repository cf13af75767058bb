"""
Experience replay - bounded FIFO of transitions sampled uniformly without
replacement to decorrelate training batches.
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from core.exceptions import DomainError, ReplayNotReadyError, ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray

    def __post_init__(self):
        if np.shape(self.state) != np.shape(self.next_state):
            raise ShapeError(f"state {np.shape(self.state)} and next_state {np.shape(self.next_state)} differ")


class ReplayMemory:
    def __init__(self, capacity: int):
        if capacity < 1:
            raise DomainError(f"replay capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._buffer = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._buffer)

    def push(self, transition: Transition):
        self._buffer.append(transition)

    def sample(self, batch_size: int, rng: np.random.Generator) -> List[Transition]:
        if batch_size < 1:
            raise DomainError(f"batch size must be positive, got {batch_size}")
        if batch_size > len(self._buffer):
            raise ReplayNotReadyError(batch_size, len(self._buffer))
        indices = rng.choice(len(self._buffer), size=batch_size, replace=False)
        return [self._buffer[i] for i in indices]


def replay_push(mem: ReplayMemory, transition: Transition):
    mem.push(transition)


def replay_sample(mem: ReplayMemory, batch_size: int, rng: np.random.Generator) -> List[Transition]:
    return mem.sample(batch_size, rng)


def stack_transitions(batch: List[Transition]) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    states = np.stack([t.state for t in batch])
    actions = np.array([t.action for t in batch], dtype=int)
    rewards = np.array([t.reward for t in batch], dtype=np.float64)
    next_states = np.stack([t.next_state for t in batch])
    return states, actions, rewards, next_states
