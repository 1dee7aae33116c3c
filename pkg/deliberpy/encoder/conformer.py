"""Conformer layers and the causal encoder."""

import numpy as np

from deliberpy.autodiff import ops
from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor, constant
from deliberpy.core.config import EncoderConfig
from deliberpy.core.errors import ShapeError, ValidationError
from deliberpy.nn.attention import MultiHeadAttention, lookahead_mask
from deliberpy.nn.layers import LayerNorm, Linear
from deliberpy.nn.module import Module, ModuleList, init_normal
from deliberpy.nn.transformer import FeedForward


def split_lookahead(lookahead: int, kernel: int):
    """Future frames granted to (attention, convolution) of one layer."""
    conv_ahead = min(lookahead // 2, (kernel - 1) // 2)
    return lookahead - conv_ahead, conv_ahead


class ConvModule(Module):
    """LN, pointwise expand + GLU, masked depthwise conv, LN, swish, pointwise."""

    def __init__(self, rng: SeededRNG, dim: int, kernel: int, lookahead: int = 0):
        super().__init__()
        self.dim = dim
        self.kernel = kernel
        self.half = (kernel - 1) // 2
        self.norm = LayerNorm(dim)
        self.expand = Linear(rng, dim, 2 * dim)
        self.param("depthwise", init_normal(rng, (kernel, dim), kernel))
        self.param("depthwise_bias", np.zeros(dim))
        self.post_norm = LayerNorm(dim)
        self.project = Linear(rng, dim, dim)
        # tap k reads frame t + (k - half)
        offsets = np.arange(kernel) - self.half
        self.tap_mask = (offsets <= lookahead)[:, None]

    @staticmethod
    def count(dim: int, kernel: int) -> int:
        return (
            2 * LayerNorm.count(dim)
            + Linear.count(dim, 2 * dim)
            + kernel * dim
            + dim
            + Linear.count(dim, dim)
        )

    def __call__(self, x: Tensor) -> Tensor:
        y = self.expand(self.norm(x))
        y = ops.mul(y[:, : self.dim], ops.sigmoid(y[:, self.dim :]))
        taps = ops.mul(self.depthwise, constant(self.tap_mask.astype(x.dtype)))
        y = ops.add(ops.conv1d(y, taps, self.half, self.half), self.depthwise_bias)
        return self.project(ops.swish(self.post_norm(y)))


class ConformerLayer(Module):
    """Pre-norm conformer block.

    x + FF/2, + self-attention, + convolution, + FF/2, then a final LayerNorm.
    With ``lookahead`` 0 the layer is causal; otherwise an output frame reads
    at most ``lookahead`` future frames of the layer input.
    """

    def __init__(
        self,
        rng: SeededRNG,
        dim: int,
        ff_dim: int,
        heads: int,
        kernel: int,
        lookahead: int = 0,
        max_relative_position: int = 64,
    ):
        super().__init__()
        if kernel < 1 or kernel % 2 == 0:
            raise ValidationError(f"Conformer kernel must be odd, got {kernel}")
        if lookahead < 0:
            raise ValidationError("Conformer lookahead must be non-negative")
        self.dim = dim
        self.lookahead = lookahead
        self.attn_ahead, conv_ahead = split_lookahead(lookahead, kernel)
        self.ff_in = FeedForward(rng, dim, ff_dim)
        self.attn_norm = LayerNorm(dim)
        self.attn = MultiHeadAttention(rng, dim, heads, max_relative_position=max_relative_position)
        self.conv = ConvModule(rng, dim, kernel, conv_ahead)
        self.ff_out = FeedForward(rng, dim, ff_dim)
        self.final_norm = LayerNorm(dim)

    @staticmethod
    def count(dim: int, ff_dim: int, heads: int, kernel: int, max_relative_position: int) -> int:
        return (
            2 * FeedForward.count(dim, ff_dim)
            + LayerNorm.count(dim)
            + MultiHeadAttention.count(dim, heads, max_relative_position=max_relative_position)
            + ConvModule.count(dim, kernel)
            + LayerNorm.count(dim)
        )

    def __call__(self, x: Tensor) -> Tensor:
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ShapeError(f"Conformer layer expects (T, {self.dim}) input, got {x.shape}")
        steps = x.shape[0]
        x = ops.add(x, ops.mul(self.ff_in(x), 0.5))
        h = self.attn_norm(x)
        x = ops.add(x, self.attn(h, h, lookahead_mask(steps, steps, self.attn_ahead)))
        x = ops.add(x, self.conv(x))
        x = ops.add(x, ops.mul(self.ff_out(x), 0.5))
        return self.final_norm(x)


def time_stack(x: Tensor) -> Tensor:
    """Concatenate neighbouring frame pairs, halving the frame rate.

    An odd final frame is paired with zeros.
    """
    steps, dim = x.shape
    if steps % 2:
        x = ops.concat([x, constant(np.zeros((1, dim), dtype=x.dtype))], axis=0)
    return ops.reshape(x, ((steps + 1) // 2, 2 * dim))


def conformer_stack(rng: SeededRNG, count: int, dim: int, cfg: EncoderConfig, kernel: int, lookahead: int) -> ModuleList:
    return ModuleList(
        [
            ConformerLayer(rng, dim, cfg.ff_mult * dim, cfg.heads, kernel, lookahead, cfg.max_relative_position)
            for _ in range(count)
        ]
    )


class CausalEncoder(Module):
    """Projection, first conformer block, x2 time stacking, one wide layer, the rest.

    Maps 30-ms 240-D frames to 60-ms ``dim``-wide frames; output frame ``t``
    only reads input frames ``<= 2t + 1``.
    """

    def __init__(self, rng: SeededRNG, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        rest = cfg.causal_layers - cfg.first_block_layers - 1
        self.input_proj = Linear(rng, cfg.input_dim, cfg.dim)
        self.first_block = conformer_stack(rng, cfg.first_block_layers, cfg.dim, cfg, cfg.conv_kernel, 0)
        self.needs_stack_proj = 2 * cfg.dim != cfg.wide_layer_dim
        if self.needs_stack_proj:
            self.stack_proj = Linear(rng, 2 * cfg.dim, cfg.wide_layer_dim)
        self.wide = ConformerLayer(
            rng, cfg.wide_layer_dim, cfg.ff_mult * cfg.wide_layer_dim, cfg.heads, cfg.conv_kernel, 0, cfg.max_relative_position
        )
        self.wide_proj = Linear(rng, cfg.wide_layer_dim, cfg.dim)
        self.rest = conformer_stack(rng, rest, cfg.dim, cfg, cfg.conv_kernel, 0)

    @staticmethod
    def count(cfg: EncoderConfig) -> int:
        layer = ConformerLayer.count(cfg.dim, cfg.ff_mult * cfg.dim, cfg.heads, cfg.conv_kernel, cfg.max_relative_position)
        wide = ConformerLayer.count(
            cfg.wide_layer_dim, cfg.ff_mult * cfg.wide_layer_dim, cfg.heads, cfg.conv_kernel, cfg.max_relative_position
        )
        total = Linear.count(cfg.input_dim, cfg.dim) + (cfg.causal_layers - 1) * layer + wide
        if 2 * cfg.dim != cfg.wide_layer_dim:
            total += Linear.count(2 * cfg.dim, cfg.wide_layer_dim)
        return total + Linear.count(cfg.wide_layer_dim, cfg.dim)

    def __call__(self, stacked: Tensor) -> Tensor:
        if stacked.ndim != 2 or stacked.shape[1] != self.cfg.input_dim:
            raise ShapeError(f"Causal encoder expects (T, {self.cfg.input_dim}) input, got {stacked.shape}")
        if stacked.shape[0] < 1:
            raise ShapeError("Causal encoder needs at least one frame")
        x = self.input_proj(stacked)
        for layer in self.first_block:
            x = layer(x)
        x = time_stack(x)
        if self.needs_stack_proj:
            x = self.stack_proj(x)
        x = self.wide_proj(self.wide(x))
        for layer in self.rest:
            x = layer(x)
        return x
