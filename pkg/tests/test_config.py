import pytest
import yaml

from deliberpy.core.config import Config, load_config, preset_names
from deliberpy.core.errors import (
    ConfigError,
    FrozenParameterError,
    NumericError,
    ShapeError,
    ValidationError,
    exit_code_for,
)


class TestPresets:
    def test_every_preset_validates(self):
        names = preset_names()
        assert {"B0", "B1", "B2", "E1", "E8", "tiny", "tiny-conformer"} <= set(names)
        for name in names:
            Config.from_preset(name).validate()

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            Config.from_preset("Z9")

    def test_preset_spellings(self):
        assert Config.from_preset("B1.yaml").delib.enabled is False
        assert Config.from_preset("presets/B1").delib.enabled is False

    def test_tiny_geometry(self, tiny_cfg):
        assert tiny_cfg.vocab_size == 160
        assert tiny_cfg.encoder.dim == 32
        assert tiny_cfg.delib.text_encoder.kind == "bilstm"
        assert Config.from_preset("tiny-conformer").delib.text_encoder.kind == "conformer"


class TestMerging:
    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="encoder.depth"):
            Config().merge({"encoder": {"depth": 3}})

    def test_section_must_be_mapping(self):
        with pytest.raises(ConfigError):
            Config().merge({"encoder": 3})

    @pytest.mark.parametrize(
        "override",
        ["train.steps=ten", "delib.enabled=1", "vocab_size=1.5", "search.source=7"],
    )
    def test_type_errors(self, override):
        with pytest.raises(ConfigError):
            Config().apply_overrides([override])

    def test_ints_widen_to_floats(self):
        cfg = Config()
        cfg.apply_overrides(["train.base_lr=1"])
        assert cfg.train.base_lr == 1.0 and isinstance(cfg.train.base_lr, float)

    def test_override_syntax(self):
        with pytest.raises(ConfigError):
            Config().apply_overrides(["train.steps"])

    def test_lambda_alias(self):
        cfg = Config()
        cfg.apply_overrides(["delib.lambda=0.3"])
        assert cfg.delib.lambda_weight == 0.3
        assert cfg.to_dict()["delib"]["lambda"] == 0.3
        assert "lambda_weight" not in cfg.to_dict()["delib"]

    def test_yaml_round_trip(self, tmp_path):
        cfg = Config.from_preset("E3")
        path = tmp_path / "cfg.yaml"
        path.write_text(cfg.to_yaml())
        assert Config.from_yaml(str(path)).to_dict() == cfg.to_dict()

    def test_run_echo_keys_are_ignored(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump({"version": "0.1.0", "run": {"kind": "first-pass"}, "vocab_size": 64}))
        assert Config.from_yaml(str(path)).vocab_size == 64


class TestLoadOrder:
    def test_preset_then_file_then_overrides(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("train:\n  steps: 50\n  batch_size: 4\n")
        cfg = load_config(str(path), "tiny", ["train.steps=7"])
        assert cfg.encoder.dim == 32
        assert cfg.train.batch_size == 4
        assert cfg.train.steps == 7

    def test_result_is_validated(self):
        with pytest.raises(ConfigError):
            load_config(None, "tiny", ["encoder.conv_kernel=4"])

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("train: [1, 2\n")
        with pytest.raises(ConfigError):
            load_config(str(path))


class TestValidation:
    def test_right_context_divides_across_layers(self):
        cfg = Config()
        cfg.merge({"encoder": {"right_context_frames": 16}})
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_conformer_text_encoder_lookahead(self):
        cfg = Config.from_preset("tiny-conformer")
        cfg.merge({"delib": {"text_encoder": {"lookahead": 3}}})
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_lambda_range(self):
        cfg = Config()
        cfg.merge({"delib": {"lambda": 1.5}})
        with pytest.raises(ConfigError):
            cfg.validate()


class TestExitCodes:
    @pytest.mark.parametrize(
        "error,code",
        [
            (ConfigError("x"), 2),
            (ValidationError("x"), 2),
            (ShapeError("x"), 2),
            (NumericError("x"), 3),
            (FrozenParameterError("x"), 3),
            (RuntimeError("x"), 1),
        ],
    )
    def test_mapping(self, error, code):
        assert exit_code_for(error) == code
