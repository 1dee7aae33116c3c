"""Data models for deliberpy."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from deliberpy.core.errors import ValidationError

FRAME_RATES_MS = (10, 30, 60)


@dataclass
class FeatureMatrix:
    """Time-major acoustic features of one utterance.

    ``language_id`` is metadata for reporting only; no model code reads it.
    """

    frames: np.ndarray  # T x D
    frame_rate_ms: int = 10
    utterance_id: str = ""
    language_id: str = ""

    def __post_init__(self) -> None:
        if self.frames.ndim != 2 or self.frames.shape[0] < 1:
            raise ValidationError(f"Feature matrix must be T x D with T >= 1, got {self.frames.shape}")
        if self.frame_rate_ms not in FRAME_RATES_MS:
            raise ValidationError(f"Unsupported frame rate: {self.frame_rate_ms} ms")

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True)
class TokenSequence:
    """Wordpiece ids of a transcript; never contains blank."""

    ids: Tuple[int, ...]
    language_id: str = ""

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class EncoderOutputs:
    """Causal and cascaded encodings at the 60-ms frame rate."""

    causal: "object"  # Tensor (T', D)
    noncausal: "object"

    def source(self, name: str):
        if name == "causal":
            return self.causal
        if name == "noncausal":
            return self.noncausal
        raise ValidationError(f"Unknown encoder source: {name}")


@dataclass
class Hypothesis:
    tokens: Tuple[int, ...]
    first_pass_logp: float
    delib_logp: Optional[float] = None


@dataclass
class NBestList:
    """Hypotheses ranked by first-pass score, unique on token sequence."""

    utterance_id: str
    hyps: List[Hypothesis] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.hyps)

    @property
    def top(self) -> Hypothesis:
        if not self.hyps:
            raise ValidationError(f"Empty n-best list for {self.utterance_id}")
        return self.hyps[0]


@dataclass
class Utterance:
    """One corpus entry: raw features plus its reference transcript."""

    utterance_id: str
    language_id: str
    features: FeatureMatrix
    text: str = ""


@dataclass
class LanguageWer:
    substitutions: int = 0
    insertions: int = 0
    deletions: int = 0
    ref_words: int = 0

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def wer(self) -> float:
        """Word error rate in percent."""
        if self.ref_words == 0:
            return 0.0
        return 100.0 * self.errors / self.ref_words

    def add(self, s: int, i: int, d: int, n: int) -> None:
        self.substitutions += s
        self.insertions += i
        self.deletions += d
        self.ref_words += n


@dataclass
class WerReport:
    """Per-language WERs (percent) with their unweighted average."""

    model_id: str
    per_language: Dict[str, float]
    counts: Dict[str, LanguageWer] = field(default_factory=dict)
    param_count: Optional[int] = None

    @property
    def avg_wer(self) -> float:
        if not self.per_language:
            raise ValidationError("WER report has no languages")
        return float(np.mean(list(self.per_language.values())))

    @property
    def languages(self) -> List[str]:
        return list(self.per_language)
