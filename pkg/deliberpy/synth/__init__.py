"""Synthetic multilingual corpora for desk-scale runs."""

from deliberpy.synth.corpus import CorpusSpec, gen_corpus, load_languages, load_split, logographic_languages, read_transcripts
from deliberpy.synth.languages import LanguageConfig, LanguageSpec, build_languages, template_decode

__all__ = [
    "CorpusSpec",
    "LanguageConfig",
    "LanguageSpec",
    "build_languages",
    "gen_corpus",
    "load_languages",
    "load_split",
    "logographic_languages",
    "read_transcripts",
    "template_decode",
]
