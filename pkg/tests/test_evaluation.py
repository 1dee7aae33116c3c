import pytest

from deliberpy.core.errors import ValidationError
from deliberpy.core.models import WerReport
from deliberpy.evaluation import (
    aggregate,
    oracle_counts,
    oracle_wer,
    relative_improvement,
    relative_improvements,
    score_corpus,
    scoring_units,
    wer,
    word_error_rate,
)
from deliberpy.utils.format_utils import format_wer

LOCALES = ["en-US", "fr-FR", "es-US", "en-GB", "es-ES", "ja-JP", "zh-TW", "de-DE", "it-IT"]

CAUSAL = [6.3, 12.9, 7.3, 6.3, 7.0, 12.1, 5.3, 13.6, 8.1]
CAUSAL_DELIB = [6.1, 12.0, 6.8, 6.1, 6.8, 11.2, 5.0, 13.1, 7.6]
CASCADED = [5.5, 11.7, 6.6, 5.5, 6.4, 10.2, 4.6, 12.2, 6.6]
BIG_DELIB = [4.7, 11.3, 6.2, 4.8, 6.0, 8.8, 4.1, 11.4, 5.6]

# Per-locale WERs and the Avg. WER footer of every published column.
PUBLISHED = {
    "B0": (CAUSAL, "8.77"),
    "E0": (CAUSAL_DELIB, "8.30"),
    "B1": (CASCADED, "7.70"),
    "E1": ([5.4, 11.6, 6.6, 5.5, 6.2, 10.0, 4.6, 12.1, 6.3], "7.59"),
    "E2": ([5.3, 11.6, 6.5, 5.4, 6.2, 10.0, 4.5, 12.1, 6.3], "7.54"),
    "E3": ([5.1, 11.6, 6.5, 5.2, 6.1, 9.7, 4.4, 11.8, 6.1], "7.39"),
    "E4": ([5.3, 11.5, 6.4, 5.4, 6.2, 9.9, 4.5, 12.0, 6.3], "7.50"),
    "E5": ([5.8, 11.7, 6.7, 5.7, 6.4, 10.8, 5.0, 12.6, 6.6], "7.92"),
    "E6": ([5.7, 11.5, 6.6, 5.6, 6.4, 10.7, 5.1, 12.7, 6.7], "7.89"),
    "E7": ([4.8, 11.4, 6.4, 5.0, 5.9, 9.0, 4.1, 11.3, 5.8], "7.08"),
    "E8": (BIG_DELIB, "6.99"),
    "E9": ([5.1, 11.4, 6.4, 4.9, 5.9, 9.4, 4.3, 11.6, 5.8], "7.20"),
    "B2": ([4.9, 11.7, 6.7, 5.2, 6.1, 9.1, 4.2, 11.6, 5.8], "7.26"),
}


def _column(values):
    return dict(zip(LOCALES, values))


class TestWer:
    def test_substitution(self):
        assert wer("a b c".split(), "a x c".split()) == (1, 0, 0, 3)

    def test_insertion_and_deletion(self):
        assert wer("a b c".split(), "a b c d".split()) == (0, 1, 0, 3)
        assert wer("a b c".split(), "a c".split()) == (0, 0, 1, 3)
        assert wer("a b".split(), []) == (0, 0, 2, 2)

    def test_minimum_edit_count(self):
        s, i, d, n = wer("the cat sat on the mat".split(), "cat sat in the hat now".split())
        assert s + i + d == 4
        assert n == 6

    def test_rate_can_exceed_one(self):
        assert word_error_rate(["a"], "x y z".split()) == 3.0

    def test_empty_reference(self):
        with pytest.raises(ValidationError):
            wer([], ["a"])

    def test_scoring_units(self):
        assert scoring_units("ab cd") == ["ab", "cd"]
        assert scoring_units("的一 是", char_level=True) == ["的", "一", "是"]


class TestAggregation:
    @pytest.mark.parametrize("model_id", sorted(PUBLISHED))
    def test_unweighted_mean(self, model_id):
        column, footer = PUBLISHED[model_id]
        average = aggregate(_column(column))
        assert average == pytest.approx(float(footer), abs=0.005)
        assert format_wer(average) == footer

    def test_mean_ignores_locale_order(self):
        column, _ = PUBLISHED["E5"]
        reordered = dict(reversed(list(_column(column).items())))
        assert aggregate(reordered) == pytest.approx(aggregate(_column(column)), abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValidationError):
            aggregate({})

    @pytest.mark.parametrize(
        "baseline,new,expected",
        [(8.77, 8.30, 5.36), (7.70, 6.99, 9.22), (10.2, 8.8, 13.73)],
    )
    def test_relative_improvement(self, baseline, new, expected):
        assert relative_improvement(baseline, new) == pytest.approx(expected, abs=0.01)

    def test_relative_improvement_needs_positive_baseline(self):
        with pytest.raises(ValidationError):
            relative_improvement(0.0, 1.0)

    def test_per_language_improvements(self):
        gains = relative_improvements(
            WerReport("B1", _column(CASCADED)),
            WerReport("E8", _column(BIG_DELIB)),
        )
        assert gains["ja-JP"] == pytest.approx(13.73, abs=0.01)
        assert gains["fr-FR"] == pytest.approx(3.42, abs=0.01)

    def test_improvements_need_matching_languages(self):
        with pytest.raises(ValidationError):
            relative_improvements(WerReport("a", {"x": 1.0}), WerReport("b", {"y": 1.0}))


REFS = [
    ("lat-00000", "lat", "abc de fg"),
    ("lat-00001", "lat", "de de"),
    ("han-00000", "han", "的一是"),
]


class TestCorpusScoring:
    def test_pools_counts_per_language(self):
        hyps = {"lat-00000": "abc xx fg", "lat-00001": "de de de", "han-00000": "的二是"}
        report = score_corpus(REFS, hyps, char_level_languages={"han"}, model_id="m")
        assert report.model_id == "m"
        assert report.per_language["lat"] == pytest.approx(100.0 * 2 / 5)
        assert report.per_language["han"] == pytest.approx(100.0 / 3)
        assert report.counts["lat"].insertions == 1
        assert report.avg_wer == pytest.approx((40.0 + 100.0 / 3) / 2)

    def test_identical_text_scores_zero(self):
        hyps = {utt_id: text.upper() for utt_id, _, text in REFS}
        report = score_corpus(REFS, hyps, char_level_languages={"han"}, workers=3)
        assert report.per_language == {"han": 0.0, "lat": 0.0}

    def test_logographic_text_scored_as_one_word_without_char_level(self):
        report = score_corpus(REFS[2:], {"han-00000": "的二是"})
        assert report.per_language["han"] == 100.0

    def test_ids_must_match(self):
        with pytest.raises(ValidationError):
            score_corpus(REFS, {"lat-00000": "abc"})
        hyps = {utt_id: text for utt_id, _, text in REFS}
        hyps["grk-00000"] = "x"
        with pytest.raises(ValidationError):
            score_corpus(REFS, hyps)


class TestOracle:
    def test_best_candidate(self):
        assert oracle_counts("a b c", ["x y z", "a b x", "a b c d"]) == (1, 0, 0, 3)

    def test_first_candidate_wins_ties(self):
        assert oracle_counts("a b", ["a x", "a b c"]) == (1, 0, 0, 2)

    def test_oracle_never_worse_than_top(self):
        candidates = {
            "lat-00000": ["abc xx fg", "abc de fg"],
            "lat-00001": ["de", "dd dd"],
            "han-00000": ["的一是"],
        }
        top = score_corpus(REFS, {k: v[0] for k, v in candidates.items()}, {"han"})
        oracle = oracle_wer(REFS, candidates, {"han"})
        assert oracle.model_id == "oracle"
        for lang in top.per_language:
            assert oracle.per_language[lang] <= top.per_language[lang]
        assert oracle.per_language["lat"] == pytest.approx(20.0)

    def test_missing_nbest(self):
        with pytest.raises(ValidationError):
            oracle_wer(REFS, {"lat-00000": ["a"]})
