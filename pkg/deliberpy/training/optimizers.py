"""Gradient capping, Adam and Adafactor.

The update functions work on plain numpy arrays and return new arrays; the
optimizer classes keep one state per named parameter and write the result
back into the parameter tensors.
"""

from dataclasses import dataclass
from typing import Dict, Mapping, Optional

import numpy as np

from deliberpy.autodiff.tensor import Tensor
from deliberpy.core.errors import NumericError, ShapeError, ValidationError

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAFACTOR_EPS1 = 1e-30
ADAFACTOR_MIN_DECAY = 1e-3
ADAFACTOR_CLIP = 1.0
DEFAULT_GRAD_CAP = 5.0


def clip_per_param(grad: np.ndarray, cap: float = DEFAULT_GRAD_CAP) -> np.ndarray:
    """Scale ``grad`` down to L2 norm ``cap`` if it is larger.

    Raises:
        NumericError: If ``grad`` holds NaN or Inf.
    """
    if not np.all(np.isfinite(grad)):
        raise NumericError("Cannot clip a non-finite gradient")
    norm = float(np.sqrt(np.sum(np.square(grad, dtype=np.float64))))
    if norm > cap:
        return grad * (cap / norm)
    return grad


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros_like(cls, param: np.ndarray) -> "AdamState":
        return cls(np.zeros_like(param), np.zeros_like(param))

    @property
    def second_moment_size(self) -> int:
        return int(self.v.size)


def adam_update(
    param: np.ndarray,
    grad: np.ndarray,
    state: AdamState,
    lr: float,
    epsilon: float = 1e-8,
    beta1: float = ADAM_BETA1,
    beta2: float = ADAM_BETA2,
):
    """One bias-corrected Adam step.

    Returns:
        The updated parameter and the new state.
    """
    if lr < 0:
        raise ValidationError(f"Learning rate must be non-negative, got {lr}")
    if grad.shape != param.shape or state.m.shape != param.shape:
        raise ShapeError(f"Adam state shape mismatch for parameter of shape {param.shape}")
    step = state.step + 1
    m = beta1 * state.m + (1.0 - beta1) * grad
    v = beta2 * state.v + (1.0 - beta2) * np.square(grad)
    m_hat = m / (1.0 - beta1**step)
    v_hat = v / (1.0 - beta2**step)
    new_param = param - lr * m_hat / (np.sqrt(v_hat) + epsilon)
    return new_param.astype(param.dtype, copy=False), AdamState(m, v, step)


@dataclass
class AdafactorState:
    """Second-moment statistics; ``row``/``col`` for matrices, ``full`` otherwise."""

    row: Optional[np.ndarray] = None
    col: Optional[np.ndarray] = None
    full: Optional[np.ndarray] = None
    step: int = 0

    @classmethod
    def zeros_like(cls, param: np.ndarray) -> "AdafactorState":
        if param.ndim == 2:
            return cls(row=np.zeros(param.shape[0], param.dtype), col=np.zeros(param.shape[1], param.dtype))
        return cls(full=np.zeros_like(param))

    @property
    def factored(self) -> bool:
        return self.full is None

    @property
    def second_moment_size(self) -> int:
        if self.factored:
            return int(self.row.size + self.col.size)
        return int(self.full.size)


def adafactor_decay(step: int) -> float:
    """Step-dependent second-moment decay, never above ``1 - 1e-3``."""
    return 1.0 - max(step**-0.8, ADAFACTOR_MIN_DECAY)


def adafactor_update(param: np.ndarray, grad: np.ndarray, state: AdafactorState, lr: float):
    """One Adafactor step without first moment.

    Matrices keep row and column means of the squared gradient and divide by
    their rank-one reconstruction; other ranks keep the full mean square.
    The raw update is scaled down to RMS 1 before the learning rate applies.

    Returns:
        The updated parameter and the new state.
    """
    if lr < 0:
        raise ValidationError(f"Learning rate must be non-negative, got {lr}")
    if grad.shape != param.shape:
        raise ShapeError(f"Gradient shape {grad.shape} does not match parameter {param.shape}")
    step = state.step + 1
    decay = adafactor_decay(step)
    sq = np.square(grad) + ADAFACTOR_EPS1
    if state.factored:
        if param.ndim != 2 or state.row.shape != (param.shape[0],) or state.col.shape != (param.shape[1],):
            raise ShapeError(f"Factored state does not match parameter of shape {param.shape}")
        row = decay * state.row + (1.0 - decay) * sq.mean(axis=1)
        col = decay * state.col + (1.0 - decay) * sq.mean(axis=0)
        v_hat = np.outer(row, col) / row.mean()
        new_state = AdafactorState(row=row, col=col, step=step)
    else:
        if state.full.shape != param.shape:
            raise ShapeError(f"Adafactor state does not match parameter of shape {param.shape}")
        v_hat = decay * state.full + (1.0 - decay) * sq
        new_state = AdafactorState(full=v_hat, step=step)
    update = grad / np.sqrt(v_hat)
    rms = float(np.sqrt(np.mean(np.square(update)))) if update.size else 0.0
    update = update / max(1.0, rms / ADAFACTOR_CLIP)
    new_param = param - lr * update
    return new_param.astype(param.dtype, copy=False), new_state


class Optimizer:
    """Holds per-parameter state and applies updates in parameter-name order."""

    kind = ""

    def __init__(self, params: Mapping[str, Tensor]):
        self.params = dict(params)
        self.states: Dict[str, object] = {}

    def _init_state(self, value: np.ndarray):
        raise NotImplementedError

    def _update(self, param: np.ndarray, grad: np.ndarray, state, lr: float):
        raise NotImplementedError

    def step(self, grads: Mapping[str, np.ndarray], lr: float) -> None:
        """Update every parameter in place from its gradient.

        Raises:
            NumericError: If an update produces NaN or Inf.
        """
        for name in sorted(self.params):
            param = self.params[name]
            state = self.states.get(name)
            if state is None:
                state = self._init_state(param.data)
            new_value, new_state = self._update(param.data, grads[name], state, lr)
            if not np.all(np.isfinite(new_value)):
                raise NumericError(f"Optimizer produced non-finite values for {name}")
            param.data = new_value
            self.states[name] = new_state

    def second_moment_size(self) -> int:
        """Number of second-moment accumulators over all parameters."""
        total = 0
        for name, param in self.params.items():
            state = self.states.get(name) or self._init_state(param.data)
            total += state.second_moment_size
        return total

    def state_dict(self) -> Dict[str, np.ndarray]:
        raise NotImplementedError

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        raise NotImplementedError


class Adam(Optimizer):
    kind = "adam"

    def __init__(self, params: Mapping[str, Tensor], epsilon: float = 1e-8):
        super().__init__(params)
        self.epsilon = epsilon

    def _init_state(self, value: np.ndarray) -> AdamState:
        return AdamState.zeros_like(value)

    def _update(self, param, grad, state, lr):
        return adam_update(param, grad, state, lr, self.epsilon)

    def state_dict(self) -> Dict[str, np.ndarray]:
        out: Dict[str, np.ndarray] = {}
        for name, state in self.states.items():
            out[f"m/{name}"] = state.m
            out[f"v/{name}"] = state.v
            out[f"step/{name}"] = np.array([state.step], dtype=np.int64)
        return out

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        self.states = {}
        for name, param in self.params.items():
            if f"m/{name}" not in state:
                continue
            self.states[name] = AdamState(
                m=np.asarray(state[f"m/{name}"], dtype=param.dtype).reshape(param.shape),
                v=np.asarray(state[f"v/{name}"], dtype=param.dtype).reshape(param.shape),
                step=int(state[f"step/{name}"][0]),
            )


class Adafactor(Optimizer):
    kind = "adafactor"

    def _init_state(self, value: np.ndarray) -> AdafactorState:
        return AdafactorState.zeros_like(value)

    def _update(self, param, grad, state, lr):
        return adafactor_update(param, grad, state, lr)

    def state_dict(self) -> Dict[str, np.ndarray]:
        out: Dict[str, np.ndarray] = {}
        for name, state in self.states.items():
            if state.factored:
                out[f"row/{name}"] = state.row
                out[f"col/{name}"] = state.col
            else:
                out[f"full/{name}"] = state.full
            out[f"step/{name}"] = np.array([state.step], dtype=np.int64)
        return out

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        self.states = {}
        for name, param in self.params.items():
            if f"step/{name}" not in state:
                continue
            step = int(state[f"step/{name}"][0])
            if f"row/{name}" in state:
                self.states[name] = AdafactorState(
                    row=np.asarray(state[f"row/{name}"], dtype=param.dtype),
                    col=np.asarray(state[f"col/{name}"], dtype=param.dtype),
                    step=step,
                )
            else:
                self.states[name] = AdafactorState(
                    full=np.asarray(state[f"full/{name}"], dtype=param.dtype).reshape(param.shape),
                    step=step,
                )


def make_optimizer(kind: str, params: Mapping[str, Tensor], adam_epsilon: float = 1e-8) -> Optimizer:
    if kind == "adam":
        return Adam(params, adam_epsilon)
    if kind == "adafactor":
        return Adafactor(params)
    raise ValidationError(f"Unknown optimizer: {kind}")
