"""Per-frame sampling of a first-pass hypothesis for the text encoder."""

from typing import List, Optional, Tuple

import numpy as np

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor
from deliberpy.core.errors import ValidationError
from deliberpy.core.models import TokenSequence
from deliberpy.search.beam import LabelScorer
from deliberpy.tokenizer.wordpiece import BLANK


def tempered_probs(log_probs: np.ndarray, temperature: float) -> np.ndarray:
    z = log_probs / temperature
    z = z - z.max()
    p = np.exp(z)
    return p / p.sum()


def frame_sample(
    enc: Tensor,
    model,
    rng: SeededRNG,
    temperature: float = 1.0,
    scorer: Optional[LabelScorer] = None,
) -> Tuple[List[int], TokenSequence]:
    """Draw one token per encoder frame from the joint softmax.

    The label position advances after each non-blank draw, so the frame
    string is a valid alignment.

    Returns:
        The frame-aligned draws (one per frame, blanks included) and the
        blank-stripped sequence.
    """
    if temperature <= 0:
        raise ValidationError("temperature must be positive")
    if enc.shape[0] < 1:
        raise ValidationError("Cannot sample from an empty encoder sequence")
    scorer = scorer or LabelScorer(model, enc)
    frames: List[int] = []
    tokens: Tuple[int, ...] = ()
    for t in range(scorer.num_frames):
        v = rng.categorical(tempered_probs(scorer.log_probs(t, tokens), temperature))
        frames.append(v)
        if v != BLANK:
            tokens = tokens + (v,)
    return frames, TokenSequence(tokens)
