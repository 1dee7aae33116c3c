import numpy as np
import pytest

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.core.errors import ValidationError
from deliberpy.synth.corpus import (
    CorpusSpec,
    gen_corpus,
    load_languages,
    load_split,
    logographic_languages,
    read_transcripts,
)
from deliberpy.synth.languages import (
    MIN_TEMPLATE_HAMMING,
    LanguageConfig,
    build_languages,
    check_disjoint,
    min_template_distance,
    template_decode,
)
from deliberpy.utils.file_utils import directory_checksums

SMALL_SIZES = {"lat": 20, "grk": 10, "han": 10}


class TestLanguages:
    def test_alphabets_must_be_disjoint(self):
        with pytest.raises(ValidationError):
            check_disjoint([LanguageConfig("a", "abc"), LanguageConfig("b", "xyC")])
        with pytest.raises(ValidationError):
            check_disjoint([LanguageConfig("a", "abc"), LanguageConfig("a", "xyz")])

    def test_grammar_has_no_self_loops(self, small_spec):
        for lang in load_languages(small_spec):
            n = len(lang.inventory)
            assert lang.transitions.shape == (n + 1, n)
            assert np.all(np.diag(lang.transitions[:n]) == 0)
            np.testing.assert_allclose(lang.transitions.sum(axis=1), np.ones(n + 1))

    def test_inventories_are_unique_words(self, small_spec):
        for lang in load_languages(small_spec):
            assert len(set(lang.inventory)) == len(lang.inventory)

    def test_templates_are_separated(self, small_spec):
        languages = load_languages(small_spec)
        # +/-1 vectors differing in k places sit 2 * sqrt(k) apart
        assert min_template_distance(languages) >= 2 * np.sqrt(MIN_TEMPLATE_HAMMING) - 1e-9

    def test_same_seed_same_languages(self):
        configs = [LanguageConfig("lat", "abcdef"), LanguageConfig("grk", "αβγδεζ")]
        a = build_languages(configs, SeededRNG(3), 0.5)
        b = build_languages(configs, SeededRNG(3), 0.5)
        assert [x.inventory for x in a] == [y.inventory for y in b]
        np.testing.assert_array_equal(a[1].templates, b[1].templates)


class TestCorpus:
    def test_split_sizes(self, small_corpus):
        assert len(load_split(small_corpus, "train")) == 32
        assert len(load_split(small_corpus, "dev")) == 4
        assert len(load_split(small_corpus, "test")) == 4

    def test_ids_and_languages(self, small_corpus):
        rows = read_transcripts(small_corpus / "train.txt")
        assert rows[0][0] == "lat-00000" and rows[0][1] == "lat"
        assert {lang for _, lang, _ in rows} == set(SMALL_SIZES)
        assert all(utt_id.startswith(lang + "-") for utt_id, lang, _ in rows)

    def test_deterministic(self, small_spec, tmp_path):
        gen_corpus(small_spec, tmp_path / "a")
        gen_corpus(small_spec, tmp_path / "b")
        assert directory_checksums(tmp_path / "a") == directory_checksums(tmp_path / "b")

    def test_clean_eval_splits_decode_to_transcripts(self, small_spec, small_corpus):
        languages = load_languages(small_spec)
        for utt in load_split(small_corpus, "dev"):
            lang, words = template_decode(utt.features.frames, languages)
            assert lang == utt.language_id
            sep = "" if lang == "han" else " "
            assert sep.join(words) == utt.text

    def test_noisy_training_features(self, small_corpus, small_spec):
        utt = load_split(small_corpus, "train")[0]
        frames = utt.features.frames
        assert frames.shape[1] == 80
        assert not np.all(np.isin(frames, (-1.0, 1.0)))

    def test_logographic_languages(self, small_corpus, tmp_path):
        assert logographic_languages(small_corpus) == ["han"]
        assert logographic_languages(tmp_path) == []

    def test_spec_validation(self):
        with pytest.raises(ValidationError):
            CorpusSpec(sizes={"lat": 5}).validate()
        with pytest.raises(ValidationError):
            CorpusSpec(sizes=dict(SMALL_SIZES), split_fractions={"dev": 0.6, "test": 0.4}).validate()
        with pytest.raises(ValidationError):
            CorpusSpec.from_dict({"sizes": dict(SMALL_SIZES), "colour": "red"})

    def test_spec_yaml(self, tmp_path):
        path = tmp_path / "spec.yaml"
        path.write_text("seed: 9\nsizes: {lat: 3, grk: 2, han: 2}\nframes_per_token: [2, 3]\n")
        spec = CorpusSpec.from_yaml(path)
        assert spec.seed == 9 and spec.frames_per_token == (2, 3)

    def test_missing_split(self, tmp_path):
        with pytest.raises(ValidationError):
            load_split(tmp_path, "train")
