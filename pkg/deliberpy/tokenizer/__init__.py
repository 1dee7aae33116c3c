"""Multilingual wordpiece tokenizer."""

from deliberpy.tokenizer.wordpiece import (
    BLANK,
    EOS,
    SOS,
    UNK,
    SegmentResult,
    WordpieceVocab,
    decode,
    normalize,
    segment,
    segment_detailed,
    train_wordpieces,
)

__all__ = [
    "BLANK",
    "EOS",
    "SOS",
    "UNK",
    "SegmentResult",
    "WordpieceVocab",
    "decode",
    "normalize",
    "segment",
    "segment_detailed",
    "train_wordpieces",
]
