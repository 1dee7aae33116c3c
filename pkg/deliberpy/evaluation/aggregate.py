"""Per-language WER aggregation and relative improvements."""

from concurrent.futures import ThreadPoolExecutor
from typing import Collection, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from deliberpy.core.errors import ValidationError
from deliberpy.core.models import LanguageWer, WerReport
from deliberpy.evaluation.wer import ErrorCounts, scoring_units, wer
from deliberpy.tokenizer.wordpiece import normalize

# (utterance id, language, text)
Reference = Tuple[str, str, str]


def aggregate(per_language: Mapping[str, float]) -> float:
    """Unweighted mean of per-language WERs."""
    if not per_language:
        raise ValidationError("Cannot average an empty set of languages")
    return float(np.mean(list(per_language.values())))


def relative_improvement(baseline_wer: float, new_wer: float) -> float:
    """Relative WER reduction in percent."""
    if baseline_wer <= 0:
        raise ValidationError(f"Baseline WER must be positive, got {baseline_wer}")
    return 100.0 * (baseline_wer - new_wer) / baseline_wer


def relative_improvements(baseline: WerReport, new: WerReport) -> Dict[str, float]:
    """Per-language relative improvement of ``new`` over ``baseline``."""
    if set(baseline.per_language) != set(new.per_language):
        raise ValidationError("Reports cover different languages")
    return {
        lang: relative_improvement(baseline.per_language[lang], new.per_language[lang])
        for lang in baseline.per_language
    }


def _score_one(ref_text: str, hyp_text: str, char_level: bool) -> ErrorCounts:
    return wer(scoring_units(normalize(ref_text), char_level), scoring_units(normalize(hyp_text), char_level))


def _fold(
    refs: Sequence[Reference],
    counts: Sequence[ErrorCounts],
    model_id: str,
) -> WerReport:
    per_lang: Dict[str, LanguageWer] = {}
    for (_, lang, _), (s, i, d, n) in zip(refs, counts):
        per_lang.setdefault(lang, LanguageWer()).add(s, i, d, n)
    languages = sorted(per_lang)
    return WerReport(
        model_id=model_id,
        per_language={lang: per_lang[lang].wer for lang in languages},
        counts={lang: per_lang[lang] for lang in languages},
    )


def score_corpus(
    refs: Sequence[Reference],
    hyps: Mapping[str, str],
    char_level_languages: Collection[str] = (),
    model_id: str = "",
    workers: int = 1,
) -> WerReport:
    """Score hypothesis texts against references, pooling counts per language.

    Raises:
        ValidationError: If the hypothesis ids differ from the reference ids.
    """
    if not refs:
        raise ValidationError("No references to score")
    ref_ids = {utt_id for utt_id, _, _ in refs}
    missing = sorted(ref_ids - set(hyps))
    extra = sorted(set(hyps) - ref_ids)
    if missing or extra:
        raise ValidationError(f"Hypothesis ids do not match references; missing: {missing[:5]}, extra: {extra[:5]}")
    jobs = [(text, hyps[utt_id], lang in char_level_languages) for utt_id, lang, text in refs]
    if workers <= 1:
        counts = [_score_one(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            counts = list(executor.map(lambda job: _score_one(*job), jobs))
    return _fold(refs, counts, model_id)


def oracle_counts(ref_text: str, candidates: Sequence[str], char_level: bool = False) -> ErrorCounts:
    """Error counts of the best candidate; earlier candidates win ties."""
    if not candidates:
        raise ValidationError("Oracle needs at least one candidate")
    best: Optional[ErrorCounts] = None
    for text in candidates:
        counts = _score_one(ref_text, text, char_level)
        if best is None or sum(counts[:3]) < sum(best[:3]):
            best = counts
    return best


def oracle_wer(
    refs: Sequence[Reference],
    candidates: Mapping[str, Sequence[str]],
    char_level_languages: Collection[str] = (),
    model_id: str = "oracle",
) -> WerReport:
    """WER when every utterance picks its best n-best member."""
    missing = sorted({utt_id for utt_id, _, _ in refs} - set(candidates))
    if missing:
        raise ValidationError(f"No n-best for utterances: {missing[:5]}")
    counts: List[ErrorCounts] = [
        oracle_counts(text, candidates[utt_id], lang in char_level_languages) for utt_id, lang, text in refs
    ]
    return _fold(refs, counts, model_id)
