import numpy as np
import pytest

from deliberpy.autodiff.gradcheck import check_gradients
from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor, backward
from deliberpy.core.config import Config
from deliberpy.core.errors import ShapeError, ValidationError
from deliberpy.core.models import Hypothesis, NBestList
from deliberpy.deliberation import (
    Deliberation,
    DeliberationDecoder,
    TextEncoder,
    rescore,
    score_hypothesis,
    score_nbest,
    score_sequential,
    smoothed_cross_entropy,
)
from deliberpy.deliberation.decoder import teacher_forced_log_probs
from deliberpy.tokenizer.wordpiece import EOS, SOS


def small_cfg(kind: str = "bilstm", decoder_layers: int = 1) -> Config:
    cfg = Config()
    cfg.merge(
        {
            "vocab_size": 12,
            "encoder": {"dim": 4, "heads": 2},
            "delib": {
                "text_encoder": {
                    "kind": kind,
                    "layers": 2,
                    "dim": 4,
                    "proj": 4,
                    "embed_dim": 3,
                    "heads": 2,
                    "conv_kernel": 3,
                    "ff_mult": 2,
                    "max_relative_position": 8,
                },
                "decoder": {"layers": decoder_layers, "hidden": 8, "proj": 4, "heads": 2},
            },
        }
    )
    return cfg


@pytest.fixture
def delib(float64):
    return Deliberation(SeededRNG(1), small_cfg())


@pytest.fixture
def audio(float64):
    return Tensor(SeededRNG(2).normal(size=(5, 4)))


class TestTextEncoder:
    def test_empty_hypothesis_maps_to_null_context(self, delib):
        out = delib.text_encoder([])
        assert out is delib.text_encoder.null_context
        assert out.shape == (1, 4)

    def test_blank_rejected(self, delib):
        with pytest.raises(ValidationError):
            delib.text_encoder([4, 0, 5])

    def test_conformer_lookahead_is_four_tokens(self, float64):
        cfg = small_cfg("conformer")
        encoder = TextEncoder(SeededRNG(3), cfg.delib.text_encoder, cfg.vocab_size)
        base = encoder([4, 5, 6, 7, 8, 9, 10, 11]).numpy()
        changed = encoder([4, 5, 6, 7, 8, 9, 10, 4]).numpy()
        np.testing.assert_allclose(changed[:3], base[:3], rtol=1e-10)
        assert not np.allclose(changed[3], base[3])

    def test_bilstm_reads_the_whole_hypothesis(self, delib):
        base = delib.text_encoder([4, 5, 6]).numpy()
        changed = delib.text_encoder([4, 5, 7]).numpy()
        assert not np.allclose(changed[0], base[0])

    @pytest.mark.parametrize("kind", ["bilstm", "conformer"])
    def test_count(self, kind):
        cfg = small_cfg(kind)
        encoder = TextEncoder(SeededRNG(0), cfg.delib.text_encoder, cfg.vocab_size)
        assert encoder.num_parameters() == TextEncoder.count(cfg.delib.text_encoder, cfg.vocab_size)


class TestDecoderScoring:
    def test_parallel_equals_sequential(self, delib, audio):
        ctx = delib.context(audio, [4, 6])
        for tokens in ([], [5], [7, 8, 9, 5]):
            assert score_hypothesis(delib.decoder, tokens, ctx) == pytest.approx(
                score_sequential(delib.decoder, tokens, ctx), abs=1e-10
            )

    def test_single_token_definition(self, delib, audio):
        ctx = delib.context(audio, [4])
        first = delib.decoder([SOS], ctx).numpy()[0]
        second = delib.decoder([SOS, 7], ctx).numpy()[1]
        assert delib.score([7], ctx) == pytest.approx(first[7] + second[EOS], abs=1e-10)

    def test_rows_do_not_see_later_targets(self, delib, audio):
        ctx = delib.context(audio, [4])
        a = teacher_forced_log_probs(delib.decoder, [5, 6, 7], ctx).numpy()
        b = teacher_forced_log_probs(delib.decoder, [5, 6, 9], ctx).numpy()
        np.testing.assert_allclose(a[:2], b[:2], rtol=1e-10)

    def test_text_context_can_be_disabled(self, audio):
        cfg = small_cfg()
        cfg.delib.use_text_context = False
        model = Deliberation(SeededRNG(1), cfg)
        a = model.score([5, 6], model.context(audio, [4]))
        b = model.score([5, 6], model.context(audio, [9, 10, 11]))
        assert a == b

    def test_hypothesis_markers_rejected(self, delib, audio):
        ctx = delib.context(audio, [4])
        with pytest.raises(ValidationError):
            delib.score([5, EOS], ctx)
        with pytest.raises(ValidationError):
            delib.score([0], ctx)

    def test_empty_audio_rejected(self, delib):
        with pytest.raises(ShapeError):
            delib.context(Tensor(np.zeros((0, 4))), [4])

    def test_zero_layer_decoder_is_an_embedding(self):
        cfg = small_cfg(decoder_layers=0)
        decoder = DeliberationDecoder(SeededRNG(0), cfg.delib.decoder, 4, 4, 12)
        assert decoder.num_parameters() == DeliberationDecoder.count(cfg.delib.decoder, 4, 4, 12) == 12 * 4

    def test_count_matches_built_model(self, delib):
        assert delib.num_parameters() == Deliberation.count(small_cfg())


class TestLoss:
    def test_without_smoothing_equals_negative_score(self, delib, audio):
        ctx = delib.context(audio, [4, 5])
        loss = smoothed_cross_entropy(delib.decoder, [6, 7], ctx, smoothing=0.0)
        assert loss.item() == pytest.approx(-delib.score([6, 7], ctx), abs=1e-10)

    def test_smoothing_changes_the_loss(self, delib, audio):
        ctx = delib.context(audio, [4, 5])
        plain = smoothed_cross_entropy(delib.decoder, [6], ctx, smoothing=0.0).item()
        smoothed = smoothed_cross_entropy(delib.decoder, [6], ctx, smoothing=0.1).item()
        assert smoothed != plain

    def test_gradients(self, delib, audio):
        result = check_gradients(
            lambda: delib.loss([6, 7], audio, [4, 5, 8]),
            delib.named_parameters(),
            max_entries=4,
            rng=SeededRNG(5),
        )
        assert result.passed(1e-4), result.per_param

    def test_empty_sample_trains_null_context(self, delib, audio):
        grads = backward(delib.loss([6], audio, []), delib.named_parameters())
        assert np.any(grads["text_encoder.null_context"])
        assert not np.any(grads["text_encoder.embedding.table"])

    def test_both_context_projections_are_trained(self, delib, audio):
        grads = backward(delib.loss([6], audio, [4]), delib.named_parameters())
        assert np.any(grads["decoder.audio_proj.weight"])
        assert np.any(grads["decoder.text_proj.weight"])
        assert np.any(grads["text_encoder.embedding.table"])


def _scored(scores):
    return NBestList(
        "u",
        [Hypothesis((4 + i,), first, delib_logp=second) for i, (first, second) in enumerate(scores)],
    )


class TestRescoring:
    def test_score_nbest_independent_of_workers(self, delib, audio):
        ctx = delib.context(audio, [4])
        nbest = NBestList("u", [Hypothesis((5, 6), -1.0), Hypothesis((7,), -2.0), Hypothesis((), -3.0)])
        serial = score_nbest(delib, nbest, ctx, workers=1)
        threaded = score_nbest(delib, nbest, ctx, workers=3)
        assert [h.delib_logp for h in serial.hyps] == [h.delib_logp for h in threaded.hyps]
        assert [h.tokens for h in serial.hyps] == [h.tokens for h in nbest.hyps]
        assert all(h.delib_logp is None for h in nbest.hyps)

    def test_rescore_is_a_permutation(self):
        nbest = _scored([(-1.0, -5.0), (-2.0, -1.0), (-3.0, -3.0)])
        out = rescore(nbest, 0.0)
        assert sorted(h.tokens for h in out.hyps) == sorted(h.tokens for h in nbest.hyps)
        assert [h.tokens for h in out.hyps] == [(5,), (6,), (4,)]

    def test_lambda_one_keeps_first_pass_order(self):
        nbest = _scored([(-1.0, -5.0), (-2.0, -1.0), (-3.0, -3.0)])
        assert [h.tokens for h in rescore(nbest, 1.0).hyps] == [(4,), (5,), (6,)]

    def test_interpolation(self):
        nbest = _scored([(-1.0, -3.0), (-2.0, -1.0)])
        # 0.5 * (-3 - 1) = -2.0 against 0.5 * (-1 - 2) = -1.5
        assert rescore(nbest, 0.5).top.tokens == (5,)

    def test_ties_keep_first_pass_rank(self):
        nbest = _scored([(-1.0, -2.0), (-2.0, -2.0), (-3.0, -2.0)])
        assert [h.tokens for h in rescore(nbest, 0.0).hyps] == [(4,), (5,), (6,)]

    def test_validation(self):
        with pytest.raises(ValidationError):
            rescore(_scored([(-1.0, -1.0)]), 1.5)
        with pytest.raises(ValidationError):
            rescore(NBestList("u", [Hypothesis((4,), -1.0)]), 0.0)
        with pytest.raises(ValidationError):
            rescore(NBestList("u", []), 0.0)
