"""Cascaded non-causal encoder and the two-source audio encoder."""

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor
from deliberpy.core.config import EncoderConfig
from deliberpy.core.errors import ShapeError
from deliberpy.core.models import EncoderOutputs
from deliberpy.encoder.conformer import CausalEncoder, ConformerLayer, conformer_stack
from deliberpy.nn.layers import Linear
from deliberpy.nn.module import Module


class CascadedEncoder(Module):
    """Conformer layers with bounded lookahead stacked on the causal encoder.

    The configured right context is split evenly across layers, so output
    frame ``t`` reads causal frames ``<= t + right_context_frames`` only.
    Without layers the module is the identity.
    """

    def __init__(self, rng: SeededRNG, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.needs_proj = cfg.noncausal_layers > 0 and cfg.noncausal_dim != cfg.dim
        if self.needs_proj:
            self.in_proj = Linear(rng, cfg.dim, cfg.noncausal_dim)
        self.layers = conformer_stack(
            rng, cfg.noncausal_layers, cfg.noncausal_dim, cfg, cfg.noncausal_conv_kernel, cfg.lookahead_per_layer
        )
        if self.needs_proj:
            self.out_proj = Linear(rng, cfg.noncausal_dim, cfg.dim)

    @staticmethod
    def count(cfg: EncoderConfig) -> int:
        if cfg.noncausal_layers == 0:
            return 0
        d = cfg.noncausal_dim
        total = cfg.noncausal_layers * ConformerLayer.count(
            d, cfg.ff_mult * d, cfg.heads, cfg.noncausal_conv_kernel, cfg.max_relative_position
        )
        if d != cfg.dim:
            total += Linear.count(cfg.dim, d) + Linear.count(d, cfg.dim)
        return total

    def __call__(self, causal: Tensor) -> Tensor:
        if causal.ndim != 2 or causal.shape[1] != self.cfg.dim:
            raise ShapeError(f"Cascaded encoder expects (T, {self.cfg.dim}) input, got {causal.shape}")
        x = self.in_proj(causal) if self.needs_proj else causal
        for layer in self.layers:
            x = layer(x)
        return self.out_proj(x) if self.needs_proj else x


class AudioEncoder(Module):
    """Causal encoder followed by the cascaded encoder."""

    def __init__(self, rng: SeededRNG, cfg: EncoderConfig):
        super().__init__()
        self.causal = CausalEncoder(rng, cfg)
        self.cascade = CascadedEncoder(rng, cfg)

    @staticmethod
    def count(cfg: EncoderConfig) -> int:
        return CausalEncoder.count(cfg) + CascadedEncoder.count(cfg)

    def __call__(self, stacked: Tensor) -> EncoderOutputs:
        causal = self.causal(stacked)
        return EncoderOutputs(causal=causal, noncausal=self.cascade(causal))


def causal_encode(encoder: AudioEncoder, stacked: Tensor) -> Tensor:
    return encoder.causal(stacked)


def cascade_encode(encoder: AudioEncoder, causal: Tensor) -> Tensor:
    return encoder.cascade(causal)
