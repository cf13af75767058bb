import logging
from typing import List, Sequence

import numpy as np

from core.exceptions import ShapeError

logger = logging.getLogger(__name__)


class AdamState:
    """Bias-corrected Adam moments for a fixed list of parameter arrays."""

    def __init__(self, shapes: Sequence[tuple], lr: float = 0.001, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.first_moment = [np.zeros(shape) for shape in shapes]
        self.second_moment = [np.zeros(shape) for shape in shapes]

    @classmethod
    def for_parameters(cls, params: Sequence[np.ndarray], **kwargs) -> "AdamState":
        return cls([p.shape for p in params], **kwargs)


def adam_step(opt: AdamState, params: List[np.ndarray], grads: List[np.ndarray]) -> List[np.ndarray]:
    """One Adam update applied in place to params; returns params.

    Shapes are checked up front so a rejected call leaves the optimizer and
    the parameters untouched.
    """
    if len(params) != len(grads) or len(params) != len(opt.first_moment):
        raise ShapeError(f"{len(params)} parameters, {len(grads)} gradients, {len(opt.first_moment)} moment slots")
    for p, g, m in zip(params, grads, opt.first_moment):
        if p.shape != g.shape or p.shape != m.shape:
            raise ShapeError(f"parameter {p.shape}, gradient {g.shape} and moment {m.shape} shapes differ")

    opt.step_count += 1
    t = opt.step_count
    correction1 = 1.0 - opt.beta1 ** t
    correction2 = 1.0 - opt.beta2 ** t

    for p, g, m, v in zip(params, grads, opt.first_moment, opt.second_moment):
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * g * g
        p -= opt.lr * (m / correction1) / (np.sqrt(v / correction2) + opt.eps)
    return params
