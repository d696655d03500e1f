"""
Differentiable ops over Tensor.

Every op returns a new Tensor; when a Tape is active and an input requires
grad, the op is recorded with its vector-Jacobian product.
"""
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import IndexOutOfRangeError, ShapeMismatchError, UnknownVocabError
from .tensor import Tensor, as_tensor, make_result

Operand = Union[Tensor, np.ndarray, float, int]

LAYER_NORM_EPS = 1e-5
_GELU_C = math.sqrt(2.0 / math.pi)


def _unbroadcast(g: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum `g` down to `shape` (reverse of numpy broadcasting)"""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, dim in enumerate(shape) if dim == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatchError(f"{op}: cannot broadcast {a.shape} with {b.shape}")


# ---------------------------------------------------------------- elementwise

def add(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_result(a.data + b.data, (a, b), backward, "add")


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return make_result(a.data - b.data, (a, b), backward, "sub")


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return make_result(a.data * b.data, (a, b), backward, "mul")


def div(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("div", a, b)

    def backward(g):
        return (
            _unbroadcast(g / b.data, a.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        )

    return make_result(a.data / b.data, (a, b), backward, "div")


def scale(x: Tensor, factor: float) -> Tensor:
    factor = float(factor)

    def backward(g):
        return (g * factor,)

    return make_result(x.data * factor, (x,), backward, "scale")


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)

    def backward(g):
        return (g * out,)

    return make_result(out, (x,), backward, "exp")


def log(x: Tensor) -> Tensor:
    def backward(g):
        return (g / x.data,)

    return make_result(np.log(x.data), (x,), backward, "log")


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def backward(g):
        return (g * (1.0 - out * out),)

    return make_result(out, (x,), backward, "tanh")


def gelu(x: Tensor) -> Tensor:
    """GELU, tanh approximation"""
    u = _GELU_C * (x.data + 0.044715 * x.data ** 3)
    t = np.tanh(u)
    out = 0.5 * x.data * (1.0 + t)

    def backward(g):
        du = _GELU_C * (1.0 + 3.0 * 0.044715 * x.data ** 2)
        return (g * (0.5 * (1.0 + t) + 0.5 * x.data * (1.0 - t * t) * du),)

    return make_result(out, (x,), backward, "gelu")


def dropout(x: Tensor, p: float, rng: Optional[np.random.Generator], training: bool) -> Tensor:
    """
    Inverted dropout: zero entries with probability p and scale survivors by 1/(1-p).

    Identity (the same tensor) at eval time or when p == 0.
    """
    if not training or p <= 0.0:
        return x
    if rng is None:
        raise ValueError("dropout at train time needs a seeded generator")
    keep = (rng.random(x.shape) >= p).astype(np.float64) / (1.0 - p)

    def backward(g):
        return (g * keep,)

    return make_result(x.data * keep, (x,), backward, "dropout")


# ---------------------------------------------------------------- linear algebra

def matmul(a: Operand, b: Operand) -> Tensor:
    """
    Matrix product over the last two axes, with leading batch axes broadcast.

    Raises:
        ShapeMismatchError: inner dimensions differ
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeMismatchError(f"matmul: {a.shape} x {b.shape}")
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise ShapeMismatchError(f"matmul batch axes: {a.shape} x {b.shape}")

    def backward(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2)) if a.requires_grad else None
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g) if b.requires_grad else None
        return (
            None if ga is None else _unbroadcast(ga, a.shape),
            None if gb is None else _unbroadcast(gb, b.shape),
        )

    return make_result(np.matmul(a.data, b.data), (a, b), backward, "matmul")


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """x @ weight (+ bias)"""
    out = matmul(x, weight)
    return out if bias is None else add(out, bias)


# ---------------------------------------------------------------- reductions

def sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001 - mirrors numpy
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return make_result(np.asarray(out), (x,), backward, "sum")


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = x.data.mean(axis=axis, keepdims=keepdims)
    if axis is None:
        count = x.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([x.shape[a] for a in axes]))

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g / count, x.shape).copy(),)

    return make_result(np.asarray(out), (x,), backward, "mean")


# ---------------------------------------------------------------- shape plumbing

def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = x.data.reshape(shape)
    except ValueError:
        raise ShapeMismatchError(f"reshape: {x.shape} -> {tuple(shape)}")

    def backward(g):
        return (g.reshape(x.shape),)

    return make_result(out, (x,), backward, "reshape")


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))

    def backward(g):
        return (np.transpose(g, inverse),)

    return make_result(np.transpose(x.data, axes), (x,), backward, "transpose")


def getitem(x: Tensor, index) -> Tensor:
    out = x.data[index]

    def backward(g):
        full = np.zeros_like(x.data)
        np.add.at(full, index, g)
        return (full,)

    return make_result(np.array(out), (x,), backward, "getitem")


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeMismatchError(f"concat: {[t.shape for t in tensors]} on axis {axis}")
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return make_result(out, tuple(tensors), backward, "concat")


def broadcast_to(x: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(shape)
    try:
        out = np.broadcast_to(x.data, shape).copy()
    except ValueError:
        raise ShapeMismatchError(f"broadcast_to: {x.shape} -> {shape}")

    def backward(g):
        return (_unbroadcast(g, x.shape),)

    return make_result(out, (x,), backward, "broadcast_to")


# ---------------------------------------------------------------- network pieces

def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """exp(x - max) / sum along `axis`"""
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return make_result(out, (x,), backward, "softmax")


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = LAYER_NORM_EPS) -> Tensor:
    """Normalize over the last axis: (x - mu) / sqrt(var + eps) * gamma + beta"""
    d = x.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise ShapeMismatchError(f"layer_norm: input {x.shape}, gamma {gamma.shape}, beta {beta.shape}")
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    rstd = 1.0 / np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + eps)
    xhat = centered * rstd
    out = xhat * gamma.data + beta.data

    def backward(g):
        lead = tuple(range(g.ndim - 1))
        dgamma = (g * xhat).sum(axis=lead)
        dbeta = g.sum(axis=lead)
        dxhat = g * gamma.data
        dx = rstd * (
            dxhat
            - dxhat.mean(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
        )
        return dx, dgamma, dbeta

    return make_result(out, (x, gamma, beta), backward, "layer_norm")


def embedding_lookup(table: Tensor, ids) -> Tensor:
    """
    Gather rows of `table`.

    Raises:
        UnknownVocabError: an id falls outside the table
    """
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise UnknownVocabError(f"embedding id out of range for table of {table.shape[0]} rows")

    def backward(g):
        full = np.zeros_like(table.data)
        np.add.at(full, ids, g)
        return (full,)

    return make_result(table.data[ids], (table,), backward, "embedding_lookup")


def cross_entropy_with_logits(logits: Tensor, labels) -> Tensor:
    """
    Mean softmax cross-entropy of [B x C] logits against integer labels.

    Raises:
        IndexOutOfRangeError: a label is not a valid class
    """
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeMismatchError(f"cross_entropy: logits {logits.shape}, labels {labels.shape}")
    n, classes = logits.shape
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise IndexOutOfRangeError(f"label outside [0, {classes})")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    rows = np.arange(n)
    loss = -log_probs[rows, labels].mean()

    def backward(g):
        grad = np.exp(log_probs)
        grad[rows, labels] -= 1.0
        return (grad * (g / n),)

    return make_result(np.asarray(loss), (logits,), backward, "cross_entropy")
