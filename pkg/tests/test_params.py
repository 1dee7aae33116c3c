import pytest

from deliberpy.core.config import Config
from deliberpy.core.errors import ValidationError
from deliberpy.evaluation import count_params
from deliberpy.utils.format_utils import format_duration, format_params, format_wer, parse_params

# published model sizes; analytic counts stay within 15% of them
PUBLISHED = {
    "B0": 143e6,
    "B1": 174e6,
    "E1": 239e6,
    "E2": 247e6,
    "E3": 300e6,
    "E7": 500e6,
    "E8": 1e9,
}


class TestPresetSizes:
    @pytest.mark.parametrize("preset", sorted(PUBLISHED))
    def test_close_to_published_size(self, preset):
        total = count_params(Config.from_preset(preset)).total
        assert total == pytest.approx(PUBLISHED[preset], rel=0.15)

    def test_first_pass_only_presets(self):
        count = count_params(Config.from_preset("B0"))
        assert count.deliberation == 0
        assert count.components["encoder.cascaded"] == 0
        assert "delib.decoder" not in count.components
        assert count.total == count.first_pass

    def test_deliberation_adds_about_62m(self):
        baseline = count_params(Config.from_preset("B1"))
        delib = count_params(Config.from_preset("E1"))
        assert delib.first_pass == baseline.total
        assert delib.deliberation == pytest.approx(62e6, rel=0.15)

    def test_decoder_growth_dominates_largest_preset(self):
        count = count_params(Config.from_preset("E8"))
        assert count.components["delib.decoder"] > count.first_pass

    def test_component_names(self):
        count = count_params(Config.from_preset("E3"))
        assert set(count.components) == {
            "encoder.causal",
            "encoder.cascaded",
            "transducer.prediction",
            "transducer.joint",
            "delib.text_encoder",
            "delib.decoder",
        }


class TestFormatting:
    @pytest.mark.parametrize(
        "count,text",
        [(174_000_000, "174M"), (173_600_000, "174M"), (965_700_000, "966M"), (1_000_000_000, "1B"), (1_200_000_000, "1.2B")],
    )
    def test_format_params(self, count, text):
        assert format_params(count) == text

    def test_parse_params(self):
        assert parse_params("143M") == 143_000_000
        assert parse_params("1B") == 1_000_000_000
        assert parse_params(" 1.2b ") == 1_200_000_000
        assert parse_params("12345") == 12345
        with pytest.raises(ValidationError):
            parse_params("lots")

    def test_format_wer_and_duration(self):
        assert format_wer(8.7667) == "8.77"
        assert format_duration(3725) == "01:02:05"
