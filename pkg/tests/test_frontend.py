import numpy as np
import pytest

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.core.errors import ValidationError
from deliberpy.core.models import FeatureMatrix
from deliberpy.frontend import read_features, read_manifest, spec_augment, stack_frames, write_features
from deliberpy.frontend.augment import plan_masks


def _raw(frames: int, dim: int = 80, utt: str = "u1") -> FeatureMatrix:
    data = np.arange(frames * dim, dtype=np.float32).reshape(frames, dim)
    return FeatureMatrix(data, 10, utt, "lat")


class TestStackFrames:
    def test_exact_multiple(self):
        out = stack_frames(_raw(9))
        assert out.frames.shape == (3, 240)
        assert out.frame_rate_ms == 30
        np.testing.assert_array_equal(out.frames[1], _raw(9).frames[3:6].reshape(-1))

    def test_partial_group_repeats_last_frame(self):
        raw = _raw(10)
        out = stack_frames(raw)
        assert out.frames.shape == (4, 240)
        last = out.frames[3].reshape(3, 80)
        for row in last:
            np.testing.assert_array_equal(row, raw.frames[9])

    def test_single_frame(self):
        assert stack_frames(_raw(1)).frames.shape == (1, 240)

    def test_keeps_metadata(self):
        out = stack_frames(_raw(4, utt="grk-00003"))
        assert out.utterance_id == "grk-00003"
        assert out.language_id == "lat"

    def test_rejects_wrong_dim(self):
        with pytest.raises(ValidationError):
            stack_frames(_raw(6, dim=40))

    def test_rejects_wrong_rate(self):
        raw = FeatureMatrix(np.zeros((6, 80), dtype=np.float32), 30)
        with pytest.raises(ValidationError):
            stack_frames(raw)

    def test_empty_matrix_is_invalid(self):
        with pytest.raises(ValidationError):
            FeatureMatrix(np.zeros((0, 80), dtype=np.float32))


class TestSpecAugment:
    def test_zero_masks_is_identity(self):
        raw = _raw(12)
        out = spec_augment(raw, SeededRNG(0), freq_masks=0, time_masks=0)
        np.testing.assert_array_equal(out.frames, raw.frames)

    def test_reproducible_and_input_untouched(self):
        raw = _raw(30)
        before = raw.frames.copy()
        a = spec_augment(raw, SeededRNG(4))
        b = spec_augment(raw, SeededRNG(4))
        np.testing.assert_array_equal(a.frames, b.frames)
        np.testing.assert_array_equal(raw.frames, before)

    def test_masked_bands_are_zero(self):
        raw = FeatureMatrix(np.ones((40, 80), dtype=np.float32))
        rng = SeededRNG(9)
        plan = plan_masks(40, 80, SeededRNG(9), 2, 27, 2, 50)
        out = spec_augment(raw, rng, 2, 27, 2, 50)
        for start, width in plan.freq:
            assert not np.any(out.frames[:, start : start + width])
        for start, width in plan.time:
            assert not np.any(out.frames[start : start + width])
            assert start + width <= 40

    def test_time_mask_capped_by_length(self):
        plan = plan_masks(3, 80, SeededRNG(1), 0, 27, 5, 50)
        assert all(width <= 3 and start + width <= 3 for start, width in plan.time)

    def test_freq_width_must_fit(self):
        with pytest.raises(ValidationError):
            plan_masks(10, 20, SeededRNG(0), max_freq=27)


class TestFeatureFiles:
    def test_write_then_read(self, tmp_path):
        mats = [_raw(3, utt="a"), _raw(5, utt="b")]
        entries = write_features(tmp_path / "dev.manifest", tmp_path / "dev.feats", mats)
        assert [e.offset for e in entries] == [0, 3 * 80 * 4]
        loaded = read_features(tmp_path / "dev.manifest")
        assert [m.utterance_id for m in loaded] == ["a", "b"]
        np.testing.assert_array_equal(loaded[1].frames, mats[1].frames)
        assert (tmp_path / "dev.feats").stat().st_size == 8 * 80 * 4

    def test_manifest_line_format(self, tmp_path):
        write_features(tmp_path / "x.manifest", tmp_path / "x.feats", [_raw(2, utt="lat-00000")])
        assert (tmp_path / "x.manifest").read_text() == "lat-00000\tlat\t2\t80\t0\n"

    def test_malformed_manifest(self, tmp_path):
        (tmp_path / "bad.manifest").write_text("a\tlat\t2\n")
        with pytest.raises(ValidationError):
            read_manifest(tmp_path / "bad.manifest")

    def test_offset_past_blob(self, tmp_path):
        write_features(tmp_path / "x.manifest", tmp_path / "x.feats", [_raw(2, utt="a")])
        (tmp_path / "x.manifest").write_text("a\tlat\t2\t80\t640\n")
        with pytest.raises(ValidationError):
            read_features(tmp_path / "x.manifest")
