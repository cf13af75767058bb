"""
Q-network - a plain numpy multilayer perceptron (ReLU hidden layers, linear
output) with the mean-squared TD loss and its exact gradients.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import DomainError, ShapeError

logger = logging.getLogger(__name__)


class Mlp:
    """Feed-forward network; weights[l] has shape (fan_in, fan_out)."""

    def __init__(self, layer_dims: Sequence[int], weights: List[np.ndarray], biases: List[np.ndarray], seed: Optional[int] = None):
        layer_dims = [int(d) for d in layer_dims]
        if len(layer_dims) < 2 or any(d < 1 for d in layer_dims):
            raise ShapeError(f"layer_dims must list at least two positive widths, got {layer_dims}")
        if len(weights) != len(layer_dims) - 1 or len(biases) != len(weights):
            raise ShapeError("one weight matrix and one bias vector are required per layer")
        for l, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (layer_dims[l], layer_dims[l + 1]) or b.shape != (layer_dims[l + 1],):
                raise ShapeError(
                    f"layer {l}: weights {w.shape} / biases {b.shape} do not match "
                    f"{layer_dims[l]} -> {layer_dims[l + 1]}"
                )
        self.layer_dims = layer_dims
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]
        self.seed = seed

    @classmethod
    def initialize(cls, layer_dims: Sequence[int], rng: np.random.Generator, seed: Optional[int] = None) -> "Mlp":
        """Uniform weights and biases in [-1/sqrt(fan_in), 1/sqrt(fan_in)]."""
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(layer_dims, weights, biases, seed=seed)

    @classmethod
    def build(cls, state_dim: int, hidden_layers: Sequence[int], num_actions: int, seed: int) -> "Mlp":
        dims = [state_dim, *hidden_layers, num_actions]
        return cls.initialize(dims, np.random.default_rng(seed), seed=seed)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    def parameters(self) -> List[np.ndarray]:
        """Parameter arrays in the fixed order W0, b0, W1, b1, ..."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend([w, b])
        return params

    def copy(self) -> "Mlp":
        return Mlp(self.layer_dims, [w.copy() for w in self.weights], [b.copy() for b in self.biases], seed=self.seed)

    def load_parameters(self, source: "Mlp"):
        if source.layer_dims != self.layer_dims:
            raise ShapeError(f"cannot copy {source.layer_dims} parameters into {self.layer_dims} network")
        for dst, src in zip(self.parameters(), source.parameters()):
            dst[...] = src

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.parameters())


def _as_batch(net: Mlp, states: np.ndarray) -> np.ndarray:
    x = np.asarray(states, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != net.input_dim:
        raise ShapeError(f"state shape {x.shape} does not match network input width {net.input_dim}")
    return np.atleast_2d(x)


def _forward_cache(net: Mlp, x: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Returns layer inputs and hidden pre-activations; the last input slot holds the output."""
    inputs, pre_activations = [x], []
    h = x
    last = len(net.weights) - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w + b
        if l < last:
            pre_activations.append(z)
            h = np.maximum(z, 0.0)
        else:
            h = z
        inputs.append(h)
    return inputs, pre_activations


def mlp_forward(net: Mlp, state: np.ndarray) -> np.ndarray:
    """Q-values for one state (1-D input) or a batch of states (2-D input)."""
    x = _as_batch(net, state)
    inputs, _ = _forward_cache(net, x)
    out = inputs[-1]
    return out[0] if np.ndim(state) == 1 else out


def mse_loss(y: np.ndarray, q: np.ndarray) -> float:
    """(1/n) sum (y - Q(S, a))^2 over the taken-action values of a batch."""
    y = np.asarray(y, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if y.size == 0:
        raise DomainError("loss needs at least one sample")
    if y.shape != q.shape:
        raise ShapeError(f"targets {y.shape} and predictions {q.shape} differ in length")
    return float(np.mean((y - q) ** 2))


def _check_batch(net: Mlp, states: np.ndarray, actions: np.ndarray, targets: np.ndarray):
    x = _as_batch(net, states)
    a = np.asarray(actions, dtype=int).ravel()
    y = np.asarray(targets, dtype=np.float64).ravel()
    if not (x.shape[0] == a.size == y.size):
        raise ShapeError(f"batch sizes differ: {x.shape[0]} states, {a.size} actions, {y.size} targets")
    if a.size == 0:
        raise DomainError("loss needs at least one sample")
    if np.any(a < 0) or np.any(a >= net.output_dim):
        raise DomainError(f"actions must lie in [0, {net.output_dim})")
    return x, a, y


def loss_and_gradients(net: Mlp, states: np.ndarray, actions: np.ndarray, targets: np.ndarray) -> Tuple[float, List[np.ndarray]]:
    """MSE loss on the taken actions and its gradient for every parameter (W0, b0, ...)."""
    x, a, y = _check_batch(net, states, actions, targets)
    n = a.size
    inputs, pre_activations = _forward_cache(net, x)
    rows = np.arange(n)
    q_taken = inputs[-1][rows, a]
    loss = mse_loss(y, q_taken)

    # only the taken action's output carries gradient
    delta = np.zeros_like(inputs[-1])
    delta[rows, a] = 2.0 * (q_taken - y) / n

    grads_w, grads_b = [None] * len(net.weights), [None] * len(net.weights)
    for l in range(len(net.weights) - 1, -1, -1):
        grads_w[l] = inputs[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ net.weights[l].T) * (pre_activations[l - 1] > 0)

    grads = []
    for gw, gb in zip(grads_w, grads_b):
        grads.extend([gw, gb])
    return loss, grads


def backward(net: Mlp, states: np.ndarray, actions: np.ndarray, targets: np.ndarray) -> List[np.ndarray]:
    """Gradients of the batch loss with respect to every parameter, ordered like Mlp.parameters()."""
    _, grads = loss_and_gradients(net, states, actions, targets)
    return grads
