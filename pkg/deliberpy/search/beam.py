"""Greedy and beam-search decoding of the first pass."""

from typing import Dict, List, Optional, Tuple

import numpy as np

from deliberpy.autodiff.tensor import Tensor, no_grad
from deliberpy.core.errors import ValidationError
from deliberpy.core.models import Hypothesis, NBestList
from deliberpy.tokenizer.wordpiece import BLANK, EOS, SOS

DEFAULT_MAX_SYMBOLS = 5

# sentence markers are decoder-side only; the transducer never emits them
NEVER_EMITTED = (SOS, EOS)

Tokens = Tuple[int, ...]


class LabelScorer:
    """Caches prediction-network outputs per label history for one utterance.

    Sentence markers and ids at or above ``num_labels`` (the size of the
    vocabulary actually trained, when smaller than the output layer) get
    log-probability -inf, so no search or sampling routine can emit them.
    """

    def __init__(self, model, enc: Tensor, num_labels: Optional[int] = None):
        self.model = model
        self.num_labels = num_labels
        with no_grad():
            self.enc_proj = model.joint.project_encoder(enc)
        self._cache: Dict[Tokens, Tuple[np.ndarray, list]] = {}

    @property
    def num_frames(self) -> int:
        return self.enc_proj.shape[0]

    def _entry(self, tokens: Tokens) -> Tuple[np.ndarray, list]:
        cached = self._cache.get(tokens)
        if cached is not None:
            return cached
        with no_grad():
            if tokens:
                _, parent_state = self._entry(tokens[:-1])
                out, state = self.model.prediction.step(tokens[-1], parent_state)
            else:
                out, state = self.model.prediction.step(SOS, None)
            proj = self.model.joint.project_prediction(out)[0]
        self._cache[tokens] = (proj, state)
        return proj, state

    def log_probs(self, t: int, tokens: Tokens) -> np.ndarray:
        proj, _ = self._entry(tokens)
        lp = np.array(self.model.joint.log_probs(self.enc_proj[t], proj), copy=True)
        lp[list(NEVER_EMITTED)] = -np.inf
        if self.num_labels is not None:
            lp[self.num_labels :] = -np.inf
        return lp


def greedy_search(enc: Tensor, model, max_symbols: int = DEFAULT_MAX_SYMBOLS, scorer: Optional[LabelScorer] = None) -> Hypothesis:
    """Frame-by-frame argmax; at most ``max_symbols`` labels per frame."""
    scorer = scorer or LabelScorer(model, enc)
    tokens: Tokens = ()
    score = 0.0
    for t in range(scorer.num_frames):
        for _ in range(max_symbols):
            lp = scorer.log_probs(t, tokens)
            best = int(np.argmax(lp))
            score += float(lp[best])
            if best == BLANK:
                break
            tokens = tokens + (best,)
    return Hypothesis(tokens=tokens, first_pass_logp=score)


def _merge(pool: Dict[Tokens, float], tokens: Tokens, score: float) -> None:
    if tokens not in pool or score > pool[tokens]:
        pool[tokens] = score


def _top(pool: Dict[Tokens, float], k: int) -> Dict[Tokens, float]:
    ranked = sorted(pool.items(), key=lambda item: (-item[1], item[0]))
    return dict(ranked[:k])


def beam_search(
    enc: Tensor,
    model,
    beam: int = 8,
    max_symbols: int = DEFAULT_MAX_SYMBOLS,
    utterance_id: str = "",
    num_labels: Optional[int] = None,
) -> NBestList:
    """Transducer beam search with per-step blank/label expansion.

    Within a frame, every live hypothesis either emits blank (finishing the
    frame) or one of its ``beam`` best labels; finished and live extensions
    are ranked together and the best ``beam`` survive, merging equal label
    histories by keeping the higher score. Hypotheses still live after
    ``max_symbols`` steps carry over to the next frame. The greedy result is
    merged into the final list, so the top score is never below it.
    Only ids below ``num_labels`` are expanded when it is given.

    Raises:
        ValidationError: If ``beam`` < 1 or ``enc`` is empty.
    """
    if beam < 1:
        raise ValidationError("beam must be at least 1")
    if enc.shape[0] < 1:
        raise ValidationError("Cannot decode an empty encoder sequence")
    scorer = LabelScorer(model, enc, num_labels)
    hyps: Dict[Tokens, float] = {(): 0.0}
    for t in range(scorer.num_frames):
        live = hyps
        done: Dict[Tokens, float] = {}
        for _ in range(max_symbols):
            emitted: Dict[Tokens, float] = {}
            for tokens, score in live.items():
                lp = scorer.log_probs(t, tokens)
                _merge(done, tokens, score + float(lp[BLANK]))
                labels = np.argsort(-lp, kind="stable")
                taken = 0
                for v in labels:
                    if not np.isfinite(lp[v]):
                        break
                    if v == BLANK:
                        continue
                    _merge(emitted, tokens + (int(v),), score + float(lp[v]))
                    taken += 1
                    if taken == beam:
                        break
            ranked = sorted(
                [(-s, 0, tok) for tok, s in done.items()] + [(-s, 1, tok) for tok, s in emitted.items()]
            )[:beam]
            done = {tok: -neg for neg, kind, tok in ranked if kind == 0}
            live = {tok: -neg for neg, kind, tok in ranked if kind == 1}
            if not live:
                break
        for tokens, score in live.items():
            _merge(done, tokens, score)
        if not done:
            raise AssertionError("beam search pruned every hypothesis")
        hyps = _top(done, beam)

    greedy = greedy_search(enc, model, max_symbols, scorer)
    _merge(hyps, greedy.tokens, greedy.first_pass_logp)
    final = _top(hyps, beam)
    return NBestList(
        utterance_id=utterance_id,
        hyps=[Hypothesis(tokens=tok, first_pass_logp=score) for tok, score in final.items()],
    )
