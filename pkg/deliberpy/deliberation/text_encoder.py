"""Encoders for the sampled first-pass hypothesis."""

from typing import Sequence

import numpy as np

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor
from deliberpy.core.config import TextEncoderConfig
from deliberpy.core.errors import ValidationError
from deliberpy.encoder.conformer import ConformerLayer
from deliberpy.nn.layers import Embedding, Linear
from deliberpy.nn.module import Module, ModuleList
from deliberpy.nn.recurrent import BiLSTMP
from deliberpy.tokenizer.wordpiece import BLANK


class TextEncoder(Module):
    """Bidirectional LSTM or lookahead-limited conformer over hypothesis tokens.

    The conformer variant grants its first layer the whole token lookahead
    and keeps the others causal, so output ``s`` reads tokens ``<= s + 4``.
    An empty hypothesis maps to a single learned null vector.
    """

    def __init__(self, rng: SeededRNG, cfg: TextEncoderConfig, vocab_size: int):
        super().__init__()
        self.cfg = cfg
        self.vocab_size = vocab_size
        self.out_dim = cfg.output_dim
        self.embedding = Embedding(rng, vocab_size, cfg.embed_dim)
        if cfg.kind == "bilstm":
            layers = []
            in_dim = cfg.embed_dim
            for _ in range(cfg.layers):
                layers.append(BiLSTMP(rng, in_dim, cfg.dim // 2, cfg.proj // 2))
                in_dim = cfg.proj
            self.layers = ModuleList(layers)
            self.needs_in_proj = False
        else:
            self.needs_in_proj = cfg.embed_dim != cfg.dim
            if self.needs_in_proj:
                self.in_proj = Linear(rng, cfg.embed_dim, cfg.dim)
            self.layers = ModuleList(
                [
                    ConformerLayer(
                        rng,
                        cfg.dim,
                        cfg.ff_mult * cfg.dim,
                        cfg.heads,
                        cfg.conv_kernel,
                        cfg.lookahead if i == 0 else 0,
                        cfg.max_relative_position,
                    )
                    for i in range(cfg.layers)
                ]
            )
        self.param("null_context", np.zeros((1, self.out_dim)))

    @staticmethod
    def count(cfg: TextEncoderConfig, vocab_size: int) -> int:
        total = Embedding.count(vocab_size, cfg.embed_dim) + cfg.output_dim
        if cfg.kind == "bilstm":
            in_dim = cfg.embed_dim
            for _ in range(cfg.layers):
                total += BiLSTMP.count(in_dim, cfg.dim // 2, cfg.proj // 2)
                in_dim = cfg.proj
            return total
        if cfg.embed_dim != cfg.dim:
            total += Linear.count(cfg.embed_dim, cfg.dim)
        return total + cfg.layers * ConformerLayer.count(
            cfg.dim, cfg.ff_mult * cfg.dim, cfg.heads, cfg.conv_kernel, cfg.max_relative_position
        )

    def __call__(self, tokens: Sequence[int]) -> Tensor:
        ids = np.asarray(tokens, dtype=np.int64)
        if ids.size == 0:
            return self.null_context
        if np.any(ids == BLANK):
            raise ValidationError("Text encoder input must be blank-stripped")
        if ids.min() < 0 or ids.max() >= self.vocab_size:
            raise ValidationError("Text encoder input id outside the vocabulary")
        x = self.embedding(ids)
        if self.needs_in_proj:
            x = self.in_proj(x)
        for layer in self.layers:
            x = layer(x)
        return x


def encode_text(encoder: TextEncoder, sampled: Sequence[int]) -> Tensor:
    return encoder(sampled)
