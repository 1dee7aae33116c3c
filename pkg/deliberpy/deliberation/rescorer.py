"""Deliberation network and n-best rescoring."""

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import replace
from typing import List, Optional, Sequence

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor, no_grad
from deliberpy.core.config import Config
from deliberpy.core.errors import ValidationError
from deliberpy.core.models import NBestList
from deliberpy.deliberation.decoder import (
    DeliberationDecoder,
    TwoSourceContext,
    score_hypothesis,
    smoothed_cross_entropy,
)
from deliberpy.deliberation.text_encoder import TextEncoder
from deliberpy.nn.module import Module


class Deliberation(Module):
    """Text encoder plus two-source decoder; the only trainable second-pass part."""

    def __init__(self, rng: SeededRNG, cfg: Config):
        super().__init__()
        self.cfg = cfg
        self.text_encoder = TextEncoder(rng, cfg.delib.text_encoder, cfg.vocab_size)
        self.decoder = DeliberationDecoder(
            rng, cfg.delib.decoder, cfg.encoder.dim, self.text_encoder.out_dim, cfg.vocab_size
        )

    @staticmethod
    def count(cfg: Config) -> int:
        text = TextEncoder.count(cfg.delib.text_encoder, cfg.vocab_size)
        return text + DeliberationDecoder.count(
            cfg.delib.decoder, cfg.encoder.dim, cfg.delib.text_encoder.output_dim, cfg.vocab_size
        )

    def context(self, audio: Tensor, sampled: Sequence[int]) -> TwoSourceContext:
        """Build the decoder context from ``e`` and a blank-stripped sample."""
        return self.decoder.make_context(audio, self.text_encoder(sampled))

    def score(self, tokens: Sequence[int], ctx: TwoSourceContext) -> float:
        return score_hypothesis(self.decoder, tokens, ctx, self.cfg.delib.use_text_context)

    def loss(self, reference: Sequence[int], audio: Tensor, sampled: Sequence[int]) -> Tensor:
        """Label-smoothed CE of the reference, summed over its tokens and eos."""
        return smoothed_cross_entropy(
            self.decoder,
            reference,
            self.context(audio, sampled),
            self.cfg.delib.label_smoothing,
            self.cfg.delib.use_text_context,
        )


def score_nbest(model: Deliberation, nbest: NBestList, ctx: TwoSourceContext, workers: int = 1) -> NBestList:
    """Fill ``delib_logp`` for every hypothesis; results do not depend on ``workers``."""
    if not nbest.hyps:
        raise ValidationError(f"Empty n-best list for {nbest.utterance_id}")
    scores: List[Optional[float]] = [None] * len(nbest.hyps)
    with no_grad():
        if workers <= 1:
            for i, hyp in enumerate(nbest.hyps):
                scores[i] = model.score(hyp.tokens, ctx)
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                future_to_index = {
                    executor.submit(_score_no_grad, model, hyp.tokens, ctx): i for i, hyp in enumerate(nbest.hyps)
                }
                for future in as_completed(future_to_index):
                    scores[future_to_index[future]] = future.result()
    return NBestList(
        utterance_id=nbest.utterance_id,
        hyps=[replace(hyp, delib_logp=score) for hyp, score in zip(nbest.hyps, scores)],
    )


def _score_no_grad(model: Deliberation, tokens: Sequence[int], ctx: TwoSourceContext) -> float:
    # grad mode is per thread
    with no_grad():
        return model.score(tokens, ctx)


def rescore(nbest: NBestList, lam: float = 0.0) -> NBestList:
    """Rerank scored hypotheses by ``(1 - lam) * delib_logp + lam * first_pass_logp``.

    The sort is stable on the original first-pass rank, so the result is a
    permutation of the input and ``lam == 1`` keeps the input order.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValidationError("lambda must lie in [0, 1]")
    if not nbest.hyps:
        raise ValidationError(f"Empty n-best list for {nbest.utterance_id}")
    if any(h.delib_logp is None for h in nbest.hyps):
        raise ValidationError(f"Unscored hypotheses in {nbest.utterance_id}")

    def key(item):
        rank, hyp = item
        return (-((1.0 - lam) * hyp.delib_logp + lam * hyp.first_pass_logp), rank)

    ranked = sorted(enumerate(nbest.hyps), key=key)
    return NBestList(utterance_id=nbest.utterance_id, hyps=[hyp for _, hyp in ranked])
