"""Two-source transformer decoder."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from deliberpy.autodiff import ops
from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor, constant
from deliberpy.core.config import DecoderConfig
from deliberpy.core.errors import ShapeError, ValidationError
from deliberpy.nn.layers import Embedding, LayerNorm, Linear
from deliberpy.nn.module import Module, ModuleList
from deliberpy.nn.transformer import TwoSourceDecoderLayer, sinusoidal_positions
from deliberpy.tokenizer.wordpiece import BLANK, EOS, SOS


@dataclass
class TwoSourceContext:
    """Audio encodings and encoded hypothesis text, both at decoder width."""

    audio: Tensor
    text: Tensor


class DeliberationDecoder(Module):
    """Pre-norm decoder over [sos] + target with tied input/output embedding.

    Context projections and the final norm only exist when the decoder has
    layers; a zero-layer decoder is just the embedding table.
    """

    def __init__(self, rng: SeededRNG, cfg: DecoderConfig, audio_dim: int, text_dim: int, vocab_size: int):
        super().__init__()
        self.cfg = cfg
        self.dim = cfg.proj
        self.vocab_size = vocab_size
        self.embedding = Embedding(rng, vocab_size, cfg.proj)
        if cfg.layers > 0:
            self.audio_proj = Linear(rng, audio_dim, cfg.proj)
            self.text_proj = Linear(rng, text_dim, cfg.proj)
            self.layers = ModuleList(
                [TwoSourceDecoderLayer(rng, cfg.proj, cfg.hidden, cfg.heads) for _ in range(cfg.layers)]
            )
            self.final_norm = LayerNorm(cfg.proj)

    @staticmethod
    def count(cfg: DecoderConfig, audio_dim: int, text_dim: int, vocab_size: int) -> int:
        total = Embedding.count(vocab_size, cfg.proj)
        if cfg.layers == 0:
            return total
        return (
            total
            + Linear.count(audio_dim, cfg.proj)
            + Linear.count(text_dim, cfg.proj)
            + cfg.layers * TwoSourceDecoderLayer.count(cfg.proj, cfg.hidden, cfg.heads)
            + LayerNorm.count(cfg.proj)
        )

    def make_context(self, audio: Tensor, text: Tensor) -> TwoSourceContext:
        if audio.ndim != 2 or audio.shape[0] == 0:
            raise ShapeError("Deliberation needs a non-empty audio context")
        if text.ndim != 2 or text.shape[0] == 0:
            raise ShapeError("Deliberation needs a non-empty text context")
        if self.cfg.layers == 0:
            return TwoSourceContext(audio, text)
        return TwoSourceContext(self.audio_proj(audio), self.text_proj(text))

    def __call__(self, target_in: Sequence[int], ctx: TwoSourceContext, use_text: bool = True) -> Tensor:
        """Log-distributions over the vocabulary, one row per input position.

        Row ``i`` reads target positions ``<= i`` and both full contexts.
        """
        ids = np.asarray(target_in, dtype=np.int64)
        if ids.ndim != 1 or ids.size == 0:
            raise ValidationError("Decoder input must be a non-empty id sequence")
        if ids.min() < 0 or ids.max() >= self.vocab_size:
            raise ValidationError("Decoder input id outside the vocabulary")
        table = self.embedding.table
        x = ops.mul(self.embedding(ids), float(np.sqrt(self.dim)))
        x = ops.add(x, constant(sinusoidal_positions(ids.size, self.dim, table.dtype)))
        if self.cfg.layers > 0:
            for layer in self.layers:
                x = layer(x, ctx.audio, ctx.text, use_text)
            x = self.final_norm(x)
        logits = ops.matmul(x, ops.transpose(table, (1, 0)))
        return ops.log_softmax(logits, axis=-1)


def _check_hypothesis(tokens: Sequence[int], vocab_size: int) -> np.ndarray:
    ids = np.asarray(tokens, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= vocab_size):
        raise ValidationError("Hypothesis token outside the vocabulary")
    if np.any(np.isin(ids, (BLANK, SOS, EOS))):
        raise ValidationError("Hypothesis must not contain blank or sentence markers")
    return ids


def teacher_forced_log_probs(decoder: DeliberationDecoder, tokens: Sequence[int], ctx: TwoSourceContext, use_text: bool = True) -> Tensor:
    """Log-probabilities of ``tokens + [eos]`` given ``[sos] + tokens``, shape (S+1,)."""
    ids = _check_hypothesis(tokens, decoder.vocab_size)
    log_probs = decoder(np.concatenate([[SOS], ids]), ctx, use_text)
    targets = np.concatenate([ids, [EOS]])
    picked = ops.mul(log_probs, constant(np.eye(decoder.vocab_size, dtype=log_probs.dtype)[targets]))
    return ops.reduce_sum(picked, axis=-1)


def score_hypothesis(decoder: DeliberationDecoder, tokens: Sequence[int], ctx: TwoSourceContext, use_text: bool = True) -> float:
    """Sum of token log-probabilities plus the final eos, in one masked pass."""
    return float(np.sum(teacher_forced_log_probs(decoder, tokens, ctx, use_text).data))


def score_sequential(decoder: DeliberationDecoder, tokens: Sequence[int], ctx: TwoSourceContext, use_text: bool = True) -> float:
    """Same score accumulated one position at a time from growing prefixes."""
    ids = _check_hypothesis(tokens, decoder.vocab_size)
    targets = list(ids) + [EOS]
    total = 0.0
    for i, target in enumerate(targets):
        prefix = np.concatenate([[SOS], ids[:i]])
        total += float(decoder(prefix, ctx, use_text).data[-1, target])
    return total


def smoothed_cross_entropy(
    decoder: DeliberationDecoder,
    tokens: Sequence[int],
    ctx: TwoSourceContext,
    smoothing: float = 0.1,
    use_text: bool = True,
) -> Tensor:
    """Label-smoothed cross entropy of ``tokens + [eos]``, summed over positions."""
    ids = _check_hypothesis(tokens, decoder.vocab_size)
    log_probs = decoder(np.concatenate([[SOS], ids]), ctx, use_text)
    targets = np.concatenate([ids, [EOS]])
    vocab = decoder.vocab_size
    weights = np.full((targets.size, vocab), smoothing / vocab)
    weights[np.arange(targets.size), targets] += 1.0 - smoothing
    return ops.neg(ops.reduce_sum(ops.mul(log_probs, constant(weights.astype(log_probs.dtype)))))
