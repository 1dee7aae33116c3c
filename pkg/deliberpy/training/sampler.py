"""Batch sampling over the pooled multilingual corpus."""

from collections import Counter
from typing import Dict, List, Sequence

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.core.errors import ValidationError
from deliberpy.core.models import Utterance


def sample_indices(num_utterances: int, rng: SeededRNG, batch_size: int) -> List[int]:
    if num_utterances < 1:
        raise ValidationError("Cannot sample from an empty corpus")
    if batch_size < 1:
        raise ValidationError("batch_size must be positive")
    return [int(i) for i in rng.integers(0, num_utterances, size=batch_size)]


def sample_batch(utterances: Sequence[Utterance], rng: SeededRNG, batch_size: int) -> List[Utterance]:
    """Draw ``batch_size`` utterances i.i.d. and uniformly from the pool.

    Languages are not balanced: each language appears in proportion to its
    share of the corpus.
    """
    return [utterances[i] for i in sample_indices(len(utterances), rng, batch_size)]


def language_mass(utterances: Sequence[Utterance]) -> Dict[str, float]:
    """Share of the corpus held by each language."""
    if not utterances:
        raise ValidationError("Cannot sample from an empty corpus")
    counts = Counter(u.language_id for u in utterances)
    total = float(sum(counts.values()))
    return {lang: counts[lang] / total for lang in sorted(counts)}


def empirical_proportions(batches: Sequence[Sequence[Utterance]]) -> Dict[str, float]:
    flat = [u.language_id for batch in batches for u in batch]
    counts = Counter(flat)
    return {lang: counts[lang] / len(flat) for lang in sorted(counts)} if flat else {}
