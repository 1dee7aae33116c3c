"""Transformer building blocks."""

import numpy as np

from deliberpy.autodiff import ops
from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor
from deliberpy.nn.attention import MultiHeadAttention, lookahead_mask
from deliberpy.nn.layers import LayerNorm, Linear
from deliberpy.nn.module import Module


class FeedForward(Module):
    """Pre-norm position-wise feed-forward: LN, expand, swish, contract."""

    def __init__(self, rng: SeededRNG, dim: int, hidden: int):
        super().__init__()
        self.norm = LayerNorm(dim)
        self.expand = Linear(rng, dim, hidden)
        self.contract = Linear(rng, hidden, dim)

    @staticmethod
    def count(dim: int, hidden: int) -> int:
        return LayerNorm.count(dim) + Linear.count(dim, hidden) + Linear.count(hidden, dim)

    def __call__(self, x: Tensor) -> Tensor:
        return self.contract(ops.swish(self.expand(self.norm(x))))


def sinusoidal_positions(length: int, dim: int, dtype=np.float32) -> np.ndarray:
    position = np.arange(length)[:, None]
    rate = np.exp(-np.log(10000.0) * (np.arange(0, dim, 2) / dim))
    table = np.zeros((length, dim))
    table[:, 0::2] = np.sin(position * rate)
    table[:, 1::2] = np.cos(position * rate[: dim // 2])
    return table.astype(dtype)


class TwoSourceDecoderLayer(Module):
    """Pre-norm decoder layer attending to the target prefix, audio, then text.

    Each sub-layer adds its output back onto the residual stream.
    """

    def __init__(self, rng: SeededRNG, dim: int, hidden: int, heads: int):
        super().__init__()
        self.self_norm = LayerNorm(dim)
        self.self_attn = MultiHeadAttention(rng, dim, heads)
        self.audio_norm = LayerNorm(dim)
        self.audio_attn = MultiHeadAttention(rng, dim, heads)
        self.text_norm = LayerNorm(dim)
        self.text_attn = MultiHeadAttention(rng, dim, heads)
        self.ff = FeedForward(rng, dim, hidden)

    @staticmethod
    def count(dim: int, hidden: int, heads: int) -> int:
        attn = LayerNorm.count(dim) + MultiHeadAttention.count(dim, heads)
        return 3 * attn + FeedForward.count(dim, hidden)

    def __call__(self, x: Tensor, audio: Tensor, text: Tensor, use_text: bool = True) -> Tensor:
        steps = x.shape[0]
        h = self.self_norm(x)
        x = ops.add(x, self.self_attn(h, h, lookahead_mask(steps, steps, 0)))
        x = ops.add(x, self.audio_attn(self.audio_norm(x), audio))
        if use_text:
            x = ops.add(x, self.text_attn(self.text_norm(x), text))
        return ops.add(x, self.ff(x))
