"""AdamW with decoupled weight decay"""
import logging
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from core.errors import NonFiniteError, ShapeMismatchError
from .config import TrainConfig

logger = logging.getLogger(__name__)


class AdamState:
    """First and second moments per parameter name plus the step counter"""

    def __init__(self, m: Dict[str, np.ndarray], v: Dict[str, np.ndarray], step: int = 0):
        self.m = m
        self.v = v
        self.step = step

    @classmethod
    def zeros(cls, params: Mapping[str, np.ndarray]) -> "AdamState":
        return cls(
            {name: np.zeros_like(value, dtype=np.float64) for name, value in params.items()},
            {name: np.zeros_like(value, dtype=np.float64) for name, value in params.items()}
        )


def adamw_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, Optional[np.ndarray]],
    state: AdamState,
    lr: float,
    cfg: TrainConfig,
    decays: Callable[[str], bool] = lambda name: True
) -> AdamState:
    """
    One AdamW update, in place on `params` and `state`.

    w <- w - lr * wd * w  (when decays(name)), then
    w <- w - lr * m_hat / (sqrt(v_hat) + eps) with bias-corrected moments.

    Args:
        params: Parameter arrays, updated in place
        grads: Gradient per parameter (None counts as zero)
        state: Moments and step counter, updated in place
        lr: Learning rate for this step
        cfg: Betas, eps and weight decay
        decays: Whether a parameter receives weight decay

    Returns:
        The updated state

    Raises:
        NonFiniteError: some gradient holds NaN or inf; nothing is modified
    """
    for name, g in grads.items():
        if g is None:
            continue
        if g.shape != params[name].shape:
            raise ShapeMismatchError(f"gradient {name}: {g.shape} != {params[name].shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient for {name}")

    b1, b2 = cfg.betas
    t = state.step + 1
    correction1 = 1.0 - b1 ** t
    correction2 = 1.0 - b2 ** t
    for name, w in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(w)
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        if cfg.weight_decay and decays(name):
            w -= lr * cfg.weight_decay * w
        w -= lr * (m / correction1) / (np.sqrt(v / correction2) + cfg.adam_eps)
    state.step = t
    return state
