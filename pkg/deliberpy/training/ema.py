"""Exponential moving average of parameters."""

from typing import Dict, Mapping

import numpy as np

from deliberpy.autodiff.tensor import Tensor
from deliberpy.core.errors import ValidationError


def ema_update(ema: Mapping[str, np.ndarray], params: Mapping[str, np.ndarray], decay: float) -> Dict[str, np.ndarray]:
    """Return ``decay * ema + (1 - decay) * param`` for every name in ``ema``."""
    if not 0.0 <= decay <= 1.0:
        raise ValidationError(f"EMA decay must lie in [0, 1], got {decay}")
    out: Dict[str, np.ndarray] = {}
    for name, shadow in ema.items():
        value = params[name]
        if decay == 0.0:
            out[name] = np.array(value, copy=True)
        else:
            out[name] = (decay * shadow + (1.0 - decay) * value).astype(shadow.dtype, copy=False)
    return out


class ExponentialMovingAverage:
    """Shadow copies of a parameter set, used as evaluation weights."""

    def __init__(self, params: Mapping[str, Tensor], decay: float):
        if not 0.0 <= decay <= 1.0:
            raise ValidationError(f"EMA decay must lie in [0, 1], got {decay}")
        self.params = dict(params)
        self.decay = decay
        self.shadow: Dict[str, np.ndarray] = {name: p.data.copy() for name, p in self.params.items()}

    def update(self) -> None:
        self.shadow = ema_update(self.shadow, {n: p.data for n, p in self.params.items()}, self.decay)

    def state_dict(self) -> Dict[str, np.ndarray]:
        return dict(self.shadow)

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        for name, p in self.params.items():
            if name in state:
                self.shadow[name] = np.asarray(state[name], dtype=p.dtype).reshape(p.shape)
