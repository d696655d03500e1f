"""Central finite-difference gradient checking"""
import logging
from typing import Callable, Optional, Sequence

import numpy as np

from core.errors import NonDeterministicError
from .rng import make_rng
from .tensor import Tape, Tensor

logger = logging.getLogger(__name__)


def grad_check(
    f: Callable[[], Tensor],
    params: Sequence[Tensor],
    h: float = 1e-5,
    entries_per_param: Optional[int] = None,
    seed: int = 0
) -> float:
    """
    Compare tape gradients of a scalar computation against central differences.

    Args:
        f: Deterministic scalar-valued computation over `params` (dropout off)
        params: Leaf tensors to check; their data is perturbed in place and restored
        h: Finite-difference step
        entries_per_param: Check only this many randomly chosen entries per tensor
            (all entries when None)
        seed: Seed for the entry sample

    Returns:
        max over checked entries of |analytic - numeric| / max(1, |analytic|, |numeric|)

    Raises:
        NonDeterministicError: two forward passes disagree
    """
    first, second = f().item(), f().item()
    if first != second:
        raise NonDeterministicError(f"forward passes disagree: {first!r} vs {second!r}")

    for p in params:
        p.zero_grad()
    with Tape() as tape:
        loss = f()
        tape.backward(loss)

    rng = make_rng(seed, "grad_check")
    worst = 0.0
    for p in params:
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        if entries_per_param is None or entries_per_param >= p.size:
            flat_indices = np.arange(p.size)
        else:
            flat_indices = np.sort(rng.choice(p.size, size=entries_per_param, replace=False))

        for flat in flat_indices:
            idx = np.unravel_index(int(flat), p.shape)
            original = p.data[idx]
            p.data[idx] = original + h
            plus = f().item()
            p.data[idx] = original - h
            minus = f().item()
            p.data[idx] = original

            numeric = (plus - minus) / (2.0 * h)
            a = float(analytic[idx])
            err = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
            worst = max(worst, err)

    logger.debug(f"grad_check over {len(params)} tensors: max relative error {worst:.3e}")
    return worst
