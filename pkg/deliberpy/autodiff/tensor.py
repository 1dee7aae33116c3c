"""Dense tensors with reverse-mode automatic differentiation."""

import threading
from contextlib import contextmanager
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from deliberpy.core.errors import NumericError, ShapeError, ValidationError

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_DTYPES = {"float32": np.float32, "float64": np.float64}
_default_dtype = np.float32
_state = threading.local()


def _grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


def _debug_enabled() -> bool:
    return getattr(_state, "debug", False)


def get_default_dtype() -> type:
    return _default_dtype


def set_default_dtype(name: str) -> None:
    """Set the dtype new tensors are created with ("float32" or "float64")."""
    global _default_dtype
    if name not in _DTYPES:
        raise ValidationError(f"Unsupported dtype: {name}")
    _default_dtype = _DTYPES[name]


@contextmanager
def precision(name: str) -> Iterator[None]:
    """Temporarily switch the default dtype."""
    previous = _default_dtype
    set_default_dtype(name)
    try:
        yield
    finally:
        globals()["_default_dtype"] = previous


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording on the current thread."""
    previous = _grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


@contextmanager
def debug_mode() -> Iterator[None]:
    """Check every forward result for NaN/Inf on the current thread."""
    previous = _debug_enabled()
    _state.debug = True
    try:
        yield
    finally:
        _state.debug = previous


class Tensor:
    """A numpy array plus the bookkeeping needed to differentiate through it."""

    __slots__ = ("data", "requires_grad", "parents", "backward_fn", "op", "name")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        name: Optional[str] = None,
        dtype=None,
    ):
        self.data = np.asarray(data, dtype=dtype or _default_dtype)
        self.requires_grad = requires_grad
        self.parents: Tuple["Tensor", ...] = ()
        self.backward_fn: Optional[BackwardFn] = None
        self.op = "leaf"
        self.name = name

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
    def dtype(self):
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self.backward_fn is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.data, dtype=self.data.dtype)

    def __len__(self) -> int:
        return self.data.shape[0]

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, op={self.op}{label})"


def constant(value, like: Optional[Tensor] = None) -> Tensor:
    """Wrap a python number or array as a non-differentiable tensor."""
    if isinstance(value, Tensor):
        return value
    dtype = like.data.dtype if like is not None else None
    return Tensor(value, dtype=dtype)


def record(
    data: np.ndarray,
    inputs: Sequence[Tensor],
    backward_fn: BackwardFn,
    op: str,
) -> Tensor:
    """Create the output of an op and, when needed, its graph node.

    Args:
        data: Forward result.
        inputs: Tensors the result was computed from.
        backward_fn: Maps the output gradient to one gradient per input
            (``None`` for inputs that need none).
        op: Op kind, kept for debugging.

    Returns:
        The output tensor.
    """
    if _debug_enabled() and not np.all(np.isfinite(data)):
        raise NumericError(f"Non-finite output from op {op}")
    out = Tensor(data, dtype=data.dtype)
    out.op = op
    if _grad_enabled() and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out.parents = tuple(inputs)
        out.backward_fn = backward_fn
    return out


class Graph:
    """Ops reachable from a loss, in topological order."""

    def __init__(self, nodes: List[Tensor]):
        self.nodes = nodes

    @classmethod
    def from_loss(cls, loss: Tensor) -> "Graph":
        order: List[Tensor] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(loss, False)]
        # iterative DFS; recurrent graphs are too deep for recursion
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited or not node.requires_grad:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node.parents:
                if id(parent) not in visited and parent.requires_grad:
                    stack.append((parent, False))
        return cls(order)

    def __len__(self) -> int:
        return len(self.nodes)

    def run_backward(self, loss: Tensor) -> Dict[int, np.ndarray]:
        """Propagate d(loss)/d(node) to every node, visiting each exactly once."""
        grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for node in reversed(self.nodes):
            g = grads.get(id(node))
            if g is None or node.backward_fn is None:
                continue
            parent_grads = node.backward_fn(g)
            for parent, pg in zip(node.parents, parent_grads):
                if pg is None or not parent.requires_grad:
                    continue
                if pg.shape != parent.shape:
                    raise ShapeError(
                        f"Gradient shape {pg.shape} does not match input shape {parent.shape} in {node.op}"
                    )
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pg
                else:
                    grads[key] = pg
        return grads


def backward(loss: Tensor, params: Mapping[str, Tensor]) -> Dict[str, np.ndarray]:
    """Compute gradients of a scalar loss for named parameters.

    Unreachable or frozen parameters get a zero gradient of their own shape.

    Raises:
        ShapeError: If the loss is not a scalar.
        NumericError: If the loss or any gradient is non-finite.
    """
    if loss.data.size != 1:
        raise ShapeError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not np.all(np.isfinite(loss.data)):
        raise NumericError("Loss is not finite")
    grads = Graph.from_loss(loss).run_backward(loss) if loss.requires_grad else {}
    out: Dict[str, np.ndarray] = {}
    for name, param in params.items():
        g = grads.get(id(param))
        if g is None:
            g = np.zeros_like(param.data)
        elif not np.all(np.isfinite(g)):
            raise NumericError(f"Non-finite gradient for parameter {name}")
        out[name] = g
    return out
