"""Central finite-difference gradient checks."""

from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor, backward, no_grad


@dataclass
class GradCheckResult:
    max_rel_error: float
    per_param: Dict[str, float] = field(default_factory=dict)

    def passed(self, tol: float = 1e-4) -> bool:
        return self.max_rel_error < tol


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    num = float(np.linalg.norm(analytic - numeric))
    den = float(np.linalg.norm(analytic) + np.linalg.norm(numeric))
    return 0.0 if den == 0.0 else num / den


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    h: float = 1e-5,
    max_entries: Optional[int] = None,
    rng: Optional[SeededRNG] = None,
) -> GradCheckResult:
    """Compare :func:`backward` against central differences.

    Args:
        loss_fn: Rebuilds the scalar loss from the current parameter values.
        params: Parameters to check; their ``data`` is perturbed in place
            and restored.
        h: Finite-difference step.
        max_entries: If set, check only this many randomly chosen entries
            per parameter.
        rng: Chooses the entries when ``max_entries`` is set.

    Returns:
        Relative errors (norm-based) per parameter and overall.
    """
    analytic = backward(loss_fn(), params)
    rng = rng or SeededRNG(0)
    result = GradCheckResult(max_rel_error=0.0)
    for name, param in params.items():
        flat = param.data.reshape(-1)
        indices = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            indices = np.sort(rng.choice(flat.size, size=max_entries, replace=False))
        numeric = np.zeros(indices.size, dtype=np.float64)
        with no_grad():
            for j, i in enumerate(indices):
                original = flat[i]
                flat[i] = original + h
                plus = loss_fn().item()
                flat[i] = original - h
                minus = loss_fn().item()
                flat[i] = original
                numeric[j] = (plus - minus) / (2.0 * h)
        err = relative_error(analytic[name].reshape(-1)[indices], numeric)
        result.per_param[name] = err
        result.max_rel_error = max(result.max_rel_error, err)
    return result
