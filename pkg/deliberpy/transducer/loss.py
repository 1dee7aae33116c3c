"""Transducer loss by forward-backward dynamic programming in log space."""

import math
from typing import Sequence, Tuple

import numba
import numpy as np

from deliberpy.autodiff.tensor import Tensor, record
from deliberpy.core.errors import NumericError, ShapeError, ValidationError
from deliberpy.tokenizer.wordpiece import BLANK


@numba.njit
def _log_add(a: float, b: float) -> float:
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    if a > b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


@numba.njit
def _alpha_beta_kernel(blank_lp: np.ndarray, emit_lp: np.ndarray):
    """alpha/beta over the (T, U+1) alignment grid.

    ``blank_lp[t, u]`` is log P(blank | t, u); ``emit_lp[t, u]`` is
    log P(label u+1 | t, u).
    """
    steps, positions = blank_lp.shape
    alpha = np.empty((steps, positions))
    beta = np.empty((steps, positions))
    alpha[0, 0] = 0.0
    for t in range(steps):
        for u in range(positions):
            if t == 0 and u == 0:
                continue
            if t == 0:
                alpha[t, u] = alpha[t, u - 1] + emit_lp[t, u - 1]
            elif u == 0:
                alpha[t, u] = alpha[t - 1, u] + blank_lp[t - 1, u]
            else:
                alpha[t, u] = _log_add(alpha[t - 1, u] + blank_lp[t - 1, u], alpha[t, u - 1] + emit_lp[t, u - 1])
    last_t = steps - 1
    last_u = positions - 1
    beta[last_t, last_u] = blank_lp[last_t, last_u]
    for t in range(last_t, -1, -1):
        for u in range(last_u, -1, -1):
            if t == last_t and u == last_u:
                continue
            if t == last_t:
                beta[t, u] = beta[t, u + 1] + emit_lp[t, u]
            elif u == last_u:
                beta[t, u] = beta[t + 1, u] + blank_lp[t, u]
            else:
                beta[t, u] = _log_add(beta[t + 1, u] + blank_lp[t, u], beta[t, u + 1] + emit_lp[t, u])
    return alpha, beta


@numba.njit
def _grid_grads(alpha: np.ndarray, beta: np.ndarray, blank_lp: np.ndarray, emit_lp: np.ndarray, loglik: float):
    """d(-loglik)/d(blank_lp) and d(-loglik)/d(emit_lp)."""
    steps, positions = blank_lp.shape
    g_blank = np.zeros((steps, positions))
    g_emit = np.zeros((steps, positions - 1))
    for t in range(steps):
        for u in range(positions):
            if t + 1 < steps:
                g_blank[t, u] = -math.exp(alpha[t, u] + blank_lp[t, u] + beta[t + 1, u] - loglik)
            elif u == positions - 1:
                g_blank[t, u] = -math.exp(alpha[t, u] + blank_lp[t, u] - loglik)
            if u + 1 < positions:
                g_emit[t, u] = -math.exp(alpha[t, u] + emit_lp[t, u] + beta[t, u + 1] - loglik)
    return g_blank, g_emit


def _split_lattice(lattice: np.ndarray, labels: Sequence[int]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if lattice.ndim != 3:
        raise ShapeError(f"Lattice must be T x (U+1) x V, got {lattice.shape}")
    steps, positions, vocab = lattice.shape
    labels = np.asarray(labels, dtype=np.int64)
    if steps < 1:
        raise ShapeError("Lattice needs at least one frame")
    if positions != labels.size + 1:
        raise ShapeError(f"Lattice has {positions} label positions for {labels.size} labels")
    if np.any(labels == BLANK):
        raise ValidationError("Labels must not contain the blank id")
    if labels.size and (labels.min() < 0 or labels.max() >= vocab):
        raise ValidationError("Label id outside the vocabulary")
    if not np.all(np.isfinite(lattice)):
        raise NumericError("Lattice contains non-finite log-probabilities")
    lat = lattice.astype(np.float64)
    blank_lp = np.ascontiguousarray(lat[:, :, BLANK])
    emit_lp = np.ascontiguousarray(lat[:, np.arange(labels.size), labels]) if labels.size else np.zeros((steps, 0))
    return blank_lp, emit_lp, labels


def rnnt_alpha_beta(lattice: np.ndarray, labels: Sequence[int]) -> Tuple[np.ndarray, np.ndarray, float]:
    """Forward and backward variables plus the total log-probability.

    ``alpha[t, u] + beta[t, u]`` summed (in log space) over any anti-diagonal
    ``t + u = n`` equals the total log-probability.
    """
    blank_lp, emit_lp, _ = _split_lattice(lattice, labels)
    alpha, beta = _alpha_beta_kernel(blank_lp, emit_lp)
    return alpha, beta, float(beta[0, 0])


def rnnt_loss(lattice: Tensor, labels: Sequence[int]) -> Tensor:
    """Negative log-probability of ``labels`` summed over all alignments.

    Args:
        lattice: Joint log-probabilities, shape (T, U+1, V).
        labels: U label ids, none of them blank.

    Returns:
        Scalar loss whose backward pass scatters the alpha/beta gradient
        into the lattice.
    """
    blank_lp, emit_lp, labels = _split_lattice(lattice.data, labels)
    alpha, beta = _alpha_beta_kernel(blank_lp, emit_lp)
    loglik = float(beta[0, 0])
    if not math.isfinite(loglik):
        raise NumericError("Transducer log-likelihood is not finite")

    def grad_fn(g):
        g_blank, g_emit = _grid_grads(alpha, beta, blank_lp, emit_lp, loglik)
        full = np.zeros(lattice.shape, dtype=np.float64)
        full[:, :, BLANK] = g_blank
        if labels.size:
            full[:, np.arange(labels.size), labels] += g_emit
        return ((full * float(g)).astype(lattice.dtype),)

    return record(np.asarray(-loglik, dtype=lattice.dtype), (lattice,), grad_fn, "rnnt_loss")
