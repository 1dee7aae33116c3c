"""WER scoring, aggregation and parameter counting."""

from deliberpy.evaluation.aggregate import (
    aggregate,
    oracle_counts,
    oracle_wer,
    relative_improvement,
    relative_improvements,
    score_corpus,
)
from deliberpy.evaluation.params import ParamCount, count_params
from deliberpy.evaluation.wer import scoring_units, wer, word_error_rate

__all__ = [
    "ParamCount",
    "aggregate",
    "count_params",
    "oracle_counts",
    "oracle_wer",
    "relative_improvement",
    "relative_improvements",
    "score_corpus",
    "scoring_units",
    "wer",
    "word_error_rate",
]
