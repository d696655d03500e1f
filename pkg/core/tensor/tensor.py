"""
Tensor and Tape - dense float64 arrays with a reverse-mode gradient tape.

Ops only record onto a Tape while one is active on the current thread:

    with Tape() as tape:
        loss = model_loss(...)
        tape.backward(loss)

Outside a tape every op is a plain numpy computation (inference mode).
"""
import logging
import threading
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import NonFiniteError

logger = logging.getLogger(__name__)

_local = threading.local()

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    """Dense n-dimensional float64 array with an optional gradient"""

    __slots__ = ("data", "requires_grad", "grad", "_node", "__weakref__")

    # `ndarray + Tensor` dispatches to Tensor.__radd__
    __array_ufunc__ = None

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._node: Optional["Node"] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """Backpropagate through the tape active on this thread"""
        tape = current_tape()
        if tape is None:
            raise RuntimeError("backward() needs an active Tape")
        tape.backward(self)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # operator sugar, implemented in ops
    def __add__(self, other):
        from . import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from . import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from . import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from . import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from . import ops
        return ops.mul(other, self)

    def __truediv__(self, other):
        from . import ops
        return ops.div(self, other)

    def __neg__(self):
        from . import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)

    def __getitem__(self, index):
        from . import ops
        return ops.getitem(self, index)


class Node:
    """One recorded op: output, inputs and the vector-Jacobian product"""

    __slots__ = ("out", "parents", "backward_fn", "op")

    def __init__(self, out: Tensor, parents: Tuple[Tensor, ...], backward_fn: BackwardFn, op: str):
        self.out = out
        self.parents = parents
        self.backward_fn = backward_fn
        self.op = op


class Tape:
    """Ordered record of ops; parents always precede the nodes that consume them"""

    def __init__(self):
        self.nodes: List[Node] = []

    def __enter__(self) -> "Tape":
        _stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        stack = _stack()
        if stack and stack[-1] is self:
            stack.pop()

    def record(self, out: Tensor, parents: Tuple[Tensor, ...], backward_fn: BackwardFn, op: str) -> None:
        node = Node(out, parents, backward_fn, op)
        out._node = node
        self.nodes.append(node)

    def backward(self, loss: Tensor, grad: Optional[np.ndarray] = None) -> None:
        """
        Accumulate d(loss)/d(leaf) into `.grad` of every leaf that requires grad.

        Each node is visited once, in reverse recording order. Gradients reaching
        a tensor along several paths are summed.
        """
        seed = np.ones_like(loss.data) if grad is None else np.asarray(grad, dtype=np.float64)
        if loss.is_leaf:
            if loss.requires_grad:
                _accumulate_leaf(loss, seed)
            return

        pending = {id(loss): seed}
        for node in reversed(self.nodes):
            g = pending.pop(id(node.out), None)
            if g is None:
                continue
            parent_grads = node.backward_fn(g)
            for parent, pg in zip(node.parents, parent_grads):
                if pg is None or not parent.requires_grad:
                    continue
                if parent.is_leaf:
                    _accumulate_leaf(parent, pg)
                else:
                    key = id(parent)
                    pending[key] = pending[key] + pg if key in pending else pg


def _accumulate_leaf(t: Tensor, g: np.ndarray) -> None:
    if g.shape != t.shape:
        g = np.broadcast_to(g, t.shape)
    t.grad = np.array(g, dtype=np.float64) if t.grad is None else t.grad + g


def _stack() -> List[Tape]:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = []
        _local.stack = stack
    return stack


def current_tape() -> Optional[Tape]:
    """Tape active on this thread, if any"""
    stack = _stack()
    return stack[-1] if stack else None


def make_result(
    data: np.ndarray,
    parents: Tuple[Tensor, ...],
    backward_fn: BackwardFn,
    op: str
) -> Tensor:
    """Wrap an op result, enforce finiteness and record it when a tape is active"""
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{op} produced non-finite values")
    out = Tensor(data)
    tape = current_tape()
    if tape is not None and any(p.requires_grad for p in parents):
        out.requires_grad = True
        tape.record(out, parents, backward_fn, op)
    return out


def as_tensor(value) -> Tensor:
    """Constants (python scalars, numpy arrays) become non-differentiable tensors"""
    return value if isinstance(value, Tensor) else Tensor(value)


def parameter(data) -> Tensor:
    """Learnable leaf tensor (owns a private copy of `data`)"""
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True)
