"""Differentiable primitives.

Every op takes tensors, returns a new tensor and registers a backward
closure through :func:`record`. Ops are looked up by kind in
:func:`forward_op`; operator overloads on :class:`Tensor` are wired at the
bottom of this module.
"""

from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from deliberpy.autodiff.tensor import Tensor, constant, record
from deliberpy.core.errors import ShapeError, ValidationError

Operand = Union[Tensor, float, int, np.ndarray]

LAYER_NORM_EPS = 1e-6


def _lift(a: Operand, b: Operand) -> Tuple[Tensor, Tensor]:
    if isinstance(a, Tensor):
        return a, constant(b, like=a)
    if isinstance(b, Tensor):
        return constant(a, like=b), b
    return constant(a), constant(b)


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` back down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(a: Tensor, b: Tensor, op: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise ShapeError(f"{op}: cannot broadcast {a.shape} with {b.shape}") from e


def add(a: Operand, b: Operand) -> Tensor:
    a, b = _lift(a, b)
    _broadcast_shape(a, b, "add")

    def grad_fn(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return record(a.data + b.data, (a, b), grad_fn, "add")


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _lift(a, b)
    _broadcast_shape(a, b, "sub")

    def grad_fn(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return record(a.data - b.data, (a, b), grad_fn, "sub")


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _lift(a, b)
    _broadcast_shape(a, b, "mul")

    def grad_fn(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return record(a.data * b.data, (a, b), grad_fn, "mul")


def neg(a: Tensor) -> Tensor:
    return record(-a.data, (a,), lambda g: (-g,), "neg")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Batched matrix product over the last two axes."""
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs rank >= 2 operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: inner dimensions differ, {a.shape} @ {b.shape}")

    def grad_fn(g):
        ga = _unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape)
        gb = _unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape)
        return ga, gb

    return record(np.matmul(a.data, b.data), (a, b), grad_fn, "matmul")


def conv1d(x: Tensor, weight: Tensor, pad_left: int = 0, pad_right: int = 0) -> Tensor:
    """Depthwise 1-D convolution over time.

    Args:
        x: Input of shape (T, C).
        weight: Per-channel taps of shape (K, C).
        pad_left: Zero frames prepended.
        pad_right: Zero frames appended.

    Returns:
        Output of shape (T + pad_left + pad_right - K + 1, C); tap ``k``
        multiplies padded frame ``t + k``.
    """
    if x.ndim != 2 or weight.ndim != 2:
        raise ShapeError(f"conv1d expects (T, C) input and (K, C) weight, got {x.shape}, {weight.shape}")
    kernel, channels = weight.shape
    if kernel < 1:
        raise ValidationError("conv1d kernel size must be >= 1")
    if x.shape[1] != channels:
        raise ShapeError(f"conv1d: {x.shape[1]} input channels vs {channels} weight channels")
    if pad_left < 0 or pad_right < 0:
        raise ValidationError("conv1d padding must be non-negative")
    padded = np.pad(x.data, ((pad_left, pad_right), (0, 0)))
    out_len = padded.shape[0] - kernel + 1
    if out_len < 1:
        raise ShapeError(f"conv1d: input of length {x.shape[0]} too short for kernel {kernel}")
    windows = sliding_window_view(padded, kernel, axis=0)  # (T', C, K)
    out = np.einsum("tck,kc->tc", windows, weight.data)

    def grad_fn(g):
        gw = np.einsum("tck,tc->kc", windows, g)
        gpad = np.zeros_like(padded)
        for k in range(kernel):
            gpad[k : k + out_len] += g * weight.data[k]
        gx = gpad[pad_left : pad_left + x.shape[0]]
        return gx, gw

    return record(out, (x, weight), grad_fn, "conv1d")


def softmax(x: Tensor, axis: int = -1, mask: Optional[np.ndarray] = None) -> Tensor:
    """Softmax; entries where ``mask`` is False get exactly zero probability."""
    z = x.data
    if mask is not None:
        mask = np.broadcast_to(mask, z.shape)
        z = np.where(mask, z, -np.inf)
    peak = np.max(z, axis=axis, keepdims=True)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    e = np.exp(z - peak)
    total = np.sum(e, axis=axis, keepdims=True)
    y = e / np.where(total > 0, total, 1.0)

    def grad_fn(g):
        return (y * (g - np.sum(g * y, axis=axis, keepdims=True)),)

    return record(y.astype(x.dtype, copy=False), (x,), grad_fn, "softmax")


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    peak = np.max(x.data, axis=axis, keepdims=True)
    shifted = x.data - peak
    y = shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))

    def grad_fn(g):
        return (g - np.exp(y) * np.sum(g, axis=axis, keepdims=True),)

    return record(y, (x,), grad_fn, "log_softmax")


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    if gain.shape != (x.shape[-1],) or bias.shape != (x.shape[-1],):
        raise ShapeError(f"layer_norm: gain/bias must have shape ({x.shape[-1]},)")
    mu = np.mean(x.data, axis=-1, keepdims=True)
    centered = x.data - mu
    rstd = 1.0 / np.sqrt(np.mean(centered * centered, axis=-1, keepdims=True) + LAYER_NORM_EPS)
    xhat = centered * rstd
    lead = tuple(range(x.ndim - 1))

    def grad_fn(g):
        gh = g * gain.data
        gx = rstd * (
            gh
            - np.mean(gh, axis=-1, keepdims=True)
            - xhat * np.mean(gh * xhat, axis=-1, keepdims=True)
        )
        return gx, np.sum(g * xhat, axis=lead), np.sum(g, axis=lead)

    return record(xhat * gain.data + bias.data, (x, gain, bias), grad_fn, "layer_norm")


def sigmoid(x: Tensor) -> Tensor:
    y = 0.5 * (1.0 + np.tanh(0.5 * x.data))
    return record(y, (x,), lambda g: (g * y * (1.0 - y),), "sigmoid")


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    return record(y, (x,), lambda g: (g * (1.0 - y * y),), "tanh")


def swish(x: Tensor) -> Tensor:
    s = 0.5 * (1.0 + np.tanh(0.5 * x.data))
    y = x.data * s

    def grad_fn(g):
        return (g * (s + x.data * s * (1.0 - s)),)

    return record(y, (x,), grad_fn, "swish")


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not tensors:
        raise ShapeError("concat needs at least one tensor")
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concat: {e}") from e
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def grad_fn(g):
        return tuple(np.split(g, bounds, axis=axis))

    return record(out, tuple(tensors), grad_fn, "concat")


def slice_(x: Tensor, index: Any) -> Tensor:
    """Basic (view) indexing: ints, slices and Ellipsis."""
    try:
        out = x.data[index]
    except IndexError as e:
        raise ShapeError(f"slice: {e}") from e

    def grad_fn(g):
        gx = np.zeros_like(x.data)
        gx[index] += g
        return (gx,)

    return record(np.array(out, copy=True), (x,), grad_fn, "slice")


def transpose(x: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    axes = tuple(axes) if axes is not None else tuple(reversed(range(x.ndim)))
    inverse = tuple(np.argsort(axes))
    return record(np.transpose(x.data, axes), (x,), lambda g: (np.transpose(g, inverse),), "transpose")


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError as e:
        raise ShapeError(f"reshape: cannot view {x.shape} as {tuple(shape)}") from e
    return record(out, (x,), lambda g: (g.reshape(x.shape),), "reshape")


def embed(table: Tensor, ids) -> Tensor:
    """Row lookup ``table[ids]`` for an integer array of ids."""
    ids = np.asarray(ids, dtype=np.int64)
    if table.ndim != 2:
        raise ShapeError(f"embed expects a 2-D table, got {table.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ShapeError(f"embed: id out of range for table with {table.shape[0]} rows")

    def grad_fn(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, ids, g)
        return (gt,)

    return record(table.data[ids], (table,), grad_fn, "embed")


def reduce_sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = np.sum(x.data, axis=axis, keepdims=keepdims)

    def grad_fn(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return record(np.asarray(out, dtype=x.dtype), (x,), grad_fn, "reduce_sum")


def reduce_mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = np.mean(x.data, axis=axis, keepdims=keepdims)
    count = x.data.size / max(np.asarray(out).size, 1)

    def grad_fn(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g / count, x.shape).copy(),)

    return record(np.asarray(out, dtype=x.dtype), (x,), grad_fn, "reduce_mean")


_OPS: Dict[str, Callable[..., Tensor]] = {
    "matmul": matmul,
    "add": add,
    "sub": sub,
    "mul": mul,
    "neg": neg,
    "conv1d": conv1d,
    "softmax": softmax,
    "log_softmax": log_softmax,
    "layer_norm": layer_norm,
    "sigmoid": sigmoid,
    "tanh": tanh,
    "swish": swish,
    "concat": lambda *ts, axis=-1: concat(ts, axis=axis),
    "slice": slice_,
    "transpose": transpose,
    "reshape": reshape,
    "embed": embed,
    "reduce_sum": reduce_sum,
    "reduce_mean": reduce_mean,
}


def op_kinds() -> Tuple[str, ...]:
    return tuple(_OPS)


def forward_op(kind: str, inputs: Sequence[Any], **attrs: Any) -> Tensor:
    """Run a primitive by name.

    Args:
        kind: One of :func:`op_kinds`.
        inputs: Positional operands (tensors, or ids for ``embed``).
        **attrs: Op attributes such as ``axis``, ``mask`` or ``pad_left``.

    Raises:
        ValidationError: If ``kind`` is unknown.
    """
    fn = _OPS.get(kind)
    if fn is None:
        raise ValidationError(f"Unknown op kind: {kind}")
    return fn(*inputs, **attrs)


def _getitem(self: Tensor, index: Any) -> Tensor:
    return slice_(self, index)


Tensor.__add__ = add
Tensor.__radd__ = lambda self, other: add(other, self)
Tensor.__sub__ = sub
Tensor.__rsub__ = lambda self, other: sub(other, self)
Tensor.__mul__ = mul
Tensor.__rmul__ = lambda self, other: mul(other, self)
Tensor.__neg__ = neg
Tensor.__matmul__ = matmul
Tensor.__getitem__ = _getitem
Tensor.reshape = lambda self, *shape: reshape(self, shape[0] if len(shape) == 1 and not isinstance(shape[0], int) else shape)
Tensor.transpose = lambda self, *axes: transpose(self, axes or None)
Tensor.sum = lambda self, axis=None, keepdims=False: reduce_sum(self, axis, keepdims)
Tensor.mean = lambda self, axis=None, keepdims=False: reduce_mean(self, axis, keepdims)
