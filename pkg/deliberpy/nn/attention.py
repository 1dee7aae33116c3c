"""Multi-head attention with optional learned relative-position bias."""

from typing import Optional

import numpy as np

from deliberpy.autodiff import ops
from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor
from deliberpy.core.errors import ShapeError, ValidationError
from deliberpy.nn.layers import Linear
from deliberpy.nn.module import Module


def relative_positions(q_len: int, k_len: int, max_distance: int) -> np.ndarray:
    """Index ``clip(j - i, -R, R) + R`` into a (2R+1)-row bias table."""
    offsets = np.arange(k_len)[None, :] - np.arange(q_len)[:, None]
    return np.clip(offsets, -max_distance, max_distance) + max_distance


def lookahead_mask(q_len: int, k_len: int, lookahead: int) -> np.ndarray:
    """True where key ``j`` is visible from query ``i`` (``j <= i + lookahead``)."""
    return np.arange(k_len)[None, :] <= np.arange(q_len)[:, None] + lookahead


class MultiHeadAttention(Module):
    def __init__(
        self,
        rng: SeededRNG,
        dim: int,
        heads: int,
        kv_dim: Optional[int] = None,
        max_relative_position: Optional[int] = None,
    ):
        super().__init__()
        if dim % heads:
            raise ValidationError(f"Attention width {dim} not divisible by {heads} heads")
        self.dim = dim
        self.heads = heads
        self.head_dim = dim // heads
        kv_dim = kv_dim or dim
        self.w_q = Linear(rng, dim, dim)
        self.w_k = Linear(rng, kv_dim, dim)
        self.w_v = Linear(rng, kv_dim, dim)
        self.w_o = Linear(rng, dim, dim)
        self.max_relative_position = max_relative_position
        if max_relative_position is not None:
            self.param("rel_bias", np.zeros((2 * max_relative_position + 1, heads)))

    @staticmethod
    def count(dim: int, heads: int, kv_dim: Optional[int] = None, max_relative_position: Optional[int] = None) -> int:
        kv_dim = kv_dim or dim
        total = Linear.count(dim, dim) * 2 + Linear.count(kv_dim, dim) * 2
        if max_relative_position is not None:
            total += (2 * max_relative_position + 1) * heads
        return total

    def _split(self, x: Tensor) -> Tensor:
        # (T, dim) -> (heads, T, head_dim)
        return ops.transpose(ops.reshape(x, (x.shape[0], self.heads, self.head_dim)), (1, 0, 2))

    def __call__(self, query: Tensor, context: Tensor, mask: Optional[np.ndarray] = None) -> Tensor:
        """Attend from ``query`` (Tq, dim) over ``context`` (Tk, kv_dim).

        Args:
            query: Query-side sequence.
            context: Key/value-side sequence.
            mask: Optional boolean (Tq, Tk) visibility mask.
        """
        if query.ndim != 2 or context.ndim != 2:
            raise ShapeError("Attention expects 2-D (T, dim) sequences")
        q_len, k_len = query.shape[0], context.shape[0]
        if k_len == 0:
            raise ShapeError("Attention context is empty")
        q = self._split(self.w_q(query))
        k = ops.transpose(ops.reshape(self.w_k(context), (k_len, self.heads, self.head_dim)), (1, 2, 0))
        v = self._split(self.w_v(context))
        scores = ops.mul(ops.matmul(q, k), 1.0 / np.sqrt(self.head_dim))
        if self.max_relative_position is not None:
            index = relative_positions(q_len, k_len, self.max_relative_position)
            bias = ops.transpose(ops.embed(self.rel_bias, index), (2, 0, 1))
            scores = ops.add(scores, bias)
        weights = ops.softmax(scores, axis=-1, mask=mask[None] if mask is not None else None)
        ctx = ops.reshape(ops.transpose(ops.matmul(weights, v), (1, 0, 2)), (q_len, self.dim))
        return self.w_o(ctx)
