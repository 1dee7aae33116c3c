"""Second pass: text encoder, two-source decoder and n-best rescoring."""

from deliberpy.deliberation.decoder import (
    DeliberationDecoder,
    TwoSourceContext,
    score_hypothesis,
    score_sequential,
    smoothed_cross_entropy,
)
from deliberpy.deliberation.rescorer import Deliberation, rescore, score_nbest
from deliberpy.deliberation.text_encoder import TextEncoder, encode_text

__all__ = [
    "Deliberation",
    "DeliberationDecoder",
    "TextEncoder",
    "TwoSourceContext",
    "encode_text",
    "rescore",
    "score_hypothesis",
    "score_nbest",
    "score_sequential",
    "smoothed_cross_entropy",
]
