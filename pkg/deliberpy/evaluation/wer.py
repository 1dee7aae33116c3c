"""Word error rate by Levenshtein alignment."""

from typing import Dict, List, Sequence, Tuple

import numba
import numpy as np

from deliberpy.core.errors import ValidationError

ErrorCounts = Tuple[int, int, int, int]


@numba.njit
def _edit_counts(ref: np.ndarray, hyp: np.ndarray):
    """Substitutions, insertions and deletions of a minimum-cost alignment.

    The backtrace prefers a match, then a substitution, then an insertion,
    then a deletion among equally cheap predecessors.
    """
    n = ref.shape[0]
    m = hyp.shape[0]
    cost = np.zeros((n + 1, m + 1), dtype=np.int64)
    for i in range(n + 1):
        cost[i, 0] = i
    for j in range(m + 1):
        cost[0, j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            diag = cost[i - 1, j - 1] + (0 if ref[i - 1] == hyp[j - 1] else 1)
            cost[i, j] = min(diag, cost[i, j - 1] + 1, cost[i - 1, j] + 1)
    subs = 0
    ins = 0
    dels = 0
    i = n
    j = m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            same = ref[i - 1] == hyp[j - 1]
            if cost[i, j] == cost[i - 1, j - 1] + (0 if same else 1):
                if not same:
                    subs += 1
                i -= 1
                j -= 1
                continue
        if j > 0 and cost[i, j] == cost[i, j - 1] + 1:
            ins += 1
            j -= 1
        else:
            dels += 1
            i -= 1
    return subs, ins, dels


def _encode(ref: Sequence[str], hyp: Sequence[str]) -> Tuple[np.ndarray, np.ndarray]:
    ids: Dict[str, int] = {}
    ref_ids = np.array([ids.setdefault(w, len(ids)) for w in ref], dtype=np.int64)
    hyp_ids = np.array([ids.setdefault(w, len(ids)) for w in hyp], dtype=np.int64)
    return ref_ids, hyp_ids


def wer(ref: Sequence[str], hyp: Sequence[str]) -> ErrorCounts:
    """Alignment error counts of ``hyp`` against ``ref``.

    Returns:
        ``(substitutions, insertions, deletions, ref_words)``.

    Raises:
        ValidationError: If ``ref`` is empty.
    """
    if len(ref) == 0:
        raise ValidationError("Reference must contain at least one word")
    ref_ids, hyp_ids = _encode(ref, hyp)
    s, i, d = _edit_counts(ref_ids, hyp_ids)
    return int(s), int(i), int(d), len(ref)


def word_error_rate(ref: Sequence[str], hyp: Sequence[str]) -> float:
    """WER as a fraction."""
    s, i, d, n = wer(ref, hyp)
    return (s + i + d) / n


def scoring_units(text: str, char_level: bool = False) -> List[str]:
    """Whitespace words, or characters (spaces dropped) for logographic text."""
    if char_level:
        return [c for c in text if not c.isspace()]
    return text.split()
