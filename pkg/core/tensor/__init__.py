"""Minimal dense tensor library with reverse-mode automatic differentiation"""
from .tensor import Tensor, Tape, current_tape, parameter, as_tensor
from .rng import make_rng, rng_state, restore_rng
from .gradcheck import grad_check
from . import ops

__all__ = [
    "Tensor",
    "Tape",
    "current_tape",
    "parameter",
    "as_tensor",
    "make_rng",
    "rng_state",
    "restore_rng",
    "grad_check",
    "ops"
]
