"""Configuration management for deliberpy."""

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import yaml

from deliberpy.core.errors import ConfigError


@dataclass
class EncoderConfig:
    """Causal conformer encoder plus cascaded non-causal encoder."""

    input_dim: int = 240  # stacked 30-ms frontend vectors
    causal_layers: int = 12  # first block + wide layer + remaining layers
    first_block_layers: int = 3
    noncausal_layers: int = 5
    dim: int = 512
    wide_layer_dim: int = 1024
    noncausal_dim: int = 512
    right_context_frames: int = 15  # 0.9 s at 60 ms
    heads: int = 8
    conv_kernel: int = 15
    noncausal_conv_kernel: int = 7
    ff_mult: int = 4
    max_relative_position: int = 64

    @property
    def lookahead_per_layer(self) -> int:
        if self.noncausal_layers == 0:
            return 0
        return self.right_context_frames // self.noncausal_layers

    def validate(self) -> None:
        _positive(self, "input_dim", "dim", "wide_layer_dim", "noncausal_dim", "heads", "ff_mult")
        _positive(self, "conv_kernel", "noncausal_conv_kernel", "max_relative_position")
        if self.causal_layers < self.first_block_layers + 1:
            raise ConfigError(
                f"encoder.causal_layers ({self.causal_layers}) must cover the first block "
                f"({self.first_block_layers}) plus the wide layer"
            )
        if self.first_block_layers < 0 or self.noncausal_layers < 0:
            raise ConfigError("encoder layer counts must be non-negative")
        if self.noncausal_layers == 0:
            if self.right_context_frames != 0:
                raise ConfigError("encoder.right_context_frames must be 0 without non-causal layers")
        elif self.right_context_frames % self.noncausal_layers != 0:
            raise ConfigError(
                f"encoder.right_context_frames ({self.right_context_frames}) must divide evenly "
                f"across {self.noncausal_layers} non-causal layers"
            )
        for name in ("dim", "wide_layer_dim", "noncausal_dim"):
            if getattr(self, name) % self.heads != 0:
                raise ConfigError(f"encoder.{name} must be divisible by encoder.heads")
        for name in ("conv_kernel", "noncausal_conv_kernel"):
            if getattr(self, name) % 2 == 0:
                raise ConfigError(f"encoder.{name} must be odd")


@dataclass
class TransducerConfig:
    """Prediction and joint networks of the first pass."""

    pred_layers: int = 2
    pred_dim: int = 2048
    pred_proj: int = 640
    joint_dim: int = 640
    embed_dim: int = 640

    def validate(self) -> None:
        _positive(self, "pred_dim", "pred_proj", "joint_dim", "embed_dim")
        if self.pred_layers < 1:
            raise ConfigError("transducer.pred_layers must be at least 1")


@dataclass
class TextEncoderConfig:
    """Deliberation text encoder over the sampled first-pass hypothesis."""

    kind: str = "bilstm"  # bilstm | conformer
    layers: int = 2
    dim: int = 2048  # bilstm: cells over both directions; conformer: model width
    proj: int = 1024  # bilstm output width (both directions)
    embed_dim: int = 512
    lookahead: int = 4  # conformer only, in tokens
    heads: int = 8
    conv_kernel: int = 7
    ff_mult: int = 4
    max_relative_position: int = 64

    @property
    def output_dim(self) -> int:
        return self.proj if self.kind == "bilstm" else self.dim

    def validate(self) -> None:
        if self.kind not in ("bilstm", "conformer"):
            raise ConfigError(f"delib.text_encoder.kind must be bilstm or conformer, got {self.kind!r}")
        _positive(self, "dim", "proj", "embed_dim", "heads", "conv_kernel", "ff_mult")
        if self.layers < 0:
            raise ConfigError("delib.text_encoder.layers must be non-negative")
        if self.kind == "bilstm":
            if self.dim % 2 or self.proj % 2:
                raise ConfigError("bilstm text encoder dim and proj must be even")
            if self.layers < 1:
                raise ConfigError("bilstm text encoder needs at least one layer")
        else:
            if self.lookahead != 4:
                raise ConfigError("conformer text encoder lookahead must be exactly 4 tokens")
            if self.dim % self.heads:
                raise ConfigError("delib.text_encoder.dim must be divisible by heads")
            if self.conv_kernel % 2 == 0:
                raise ConfigError("delib.text_encoder.conv_kernel must be odd")


@dataclass
class DecoderConfig:
    """Two-source transformer decoder."""

    layers: int = 4
    hidden: int = 2048
    proj: int = 512
    heads: int = 8

    def validate(self) -> None:
        _positive(self, "hidden", "proj", "heads")
        if self.layers < 0:
            raise ConfigError("delib.decoder.layers must be non-negative")
        if self.proj % self.heads:
            raise ConfigError("delib.decoder.proj must be divisible by delib.decoder.heads")


@dataclass
class DeliberationConfig:
    """Second-pass rescorer."""

    enabled: bool = True  # false for first-pass-only systems (B0..B2)
    text_encoder: TextEncoderConfig = field(default_factory=TextEncoderConfig)
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    lambda_weight: float = 0.0  # YAML key: lambda
    label_smoothing: float = 0.1
    use_text_context: bool = True

    def validate(self) -> None:
        self.text_encoder.validate()
        self.decoder.validate()
        if not 0.0 <= self.lambda_weight <= 1.0:
            raise ConfigError("delib.lambda must lie in [0, 1]")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ConfigError("delib.label_smoothing must lie in [0, 1)")


@dataclass
class SpecAugConfig:
    """Training-time masking of raw 80-D features."""

    enabled: bool = True
    freq_masks: int = 2
    max_freq: int = 27
    time_masks: int = 2
    max_time: int = 50

    def validate(self) -> None:
        for name in ("freq_masks", "max_freq", "time_masks", "max_time"):
            if getattr(self, name) < 0:
                raise ConfigError(f"specaug.{name} must be non-negative")


@dataclass
class SearchConfig:
    """First-pass decoding."""

    beam: int = 8
    source: str = "noncausal"  # causal | noncausal
    max_symbols_per_frame: int = 5
    temperature: float = 1.0

    def validate(self) -> None:
        if self.beam < 1:
            raise ConfigError("search.beam must be at least 1")
        if self.source not in ("causal", "noncausal"):
            raise ConfigError(f"search.source must be causal or noncausal, got {self.source!r}")
        if self.max_symbols_per_frame < 1:
            raise ConfigError("search.max_symbols_per_frame must be at least 1")
        if self.temperature <= 0:
            raise ConfigError("search.temperature must be positive")


@dataclass
class TrainConfig:
    """Optimization settings shared by both trainers."""

    optimizer: str = "adam"  # adam | adafactor
    lr_schedule: str = "linear_warmup_constant"  # linear_warmup_constant | transformer
    warmup_steps: int = 32000
    base_lr: float = 1e-3
    peak_lr: float = 1.8e-3
    grad_cap: float = 5.0
    ema_decay: float = 0.9999
    batch_size: int = 4096
    steps: int = 100000
    seed: int = 1
    log_every: int = 100
    checkpoint_every: int = 1000
    adam_epsilon: float = 1e-8
    workers: int = 1
    causal_source_prob: float = 0.4

    def validate(self) -> None:
        if self.optimizer not in ("adam", "adafactor"):
            raise ConfigError(f"train.optimizer must be adam or adafactor, got {self.optimizer!r}")
        if self.lr_schedule not in ("linear_warmup_constant", "transformer"):
            raise ConfigError(f"train.lr_schedule not recognised: {self.lr_schedule!r}")
        _positive(self, "warmup_steps", "batch_size", "log_every", "checkpoint_every", "workers")
        if self.steps < 0 or self.base_lr < 0 or self.peak_lr < 0:
            raise ConfigError("train.steps and learning rates must be non-negative")
        if self.grad_cap <= 0:
            raise ConfigError("train.grad_cap must be positive")
        if not 0.0 <= self.ema_decay <= 1.0:
            raise ConfigError("train.ema_decay must lie in [0, 1]")
        if not 0.0 <= self.causal_source_prob <= 1.0:
            raise ConfigError("train.causal_source_prob must lie in [0, 1]")


# YAML spelling -> dataclass field name
_ALIASES = {"lambda": "lambda_weight"}
_REVERSE_ALIASES = {v: k for k, v in _ALIASES.items()}


@dataclass
class Config:
    """Root configuration for deliberpy."""

    preset: str = ""
    vocab_size: int = 16384
    dtype: str = "float32"  # float32 for training, float64 for verification
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    transducer: TransducerConfig = field(default_factory=TransducerConfig)
    delib: DeliberationConfig = field(default_factory=DeliberationConfig)
    specaug: SpecAugConfig = field(default_factory=SpecAugConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    @classmethod
    def from_yaml(cls, path: str) -> "Config":
        """Load configuration from a YAML file on top of the defaults."""
        cfg = cls()
        cfg.merge(_read_yaml(Path(path)))
        return cfg

    @classmethod
    def from_preset(cls, name: str) -> "Config":
        """Load a shipped preset (B0, B1, B2, E1..E9, tiny, ...)."""
        cfg = cls()
        cfg.merge(load_preset_data(name))
        cfg.preset = name
        return cfg

    def merge(self, data: Dict[str, Any]) -> None:
        """Overlay a nested mapping onto this config, validating every key."""
        _apply_mapping(self, data, prefix="")

    def set(self, dotted_key: str, value: Any) -> None:
        """Set one ``section.key`` value."""
        parts = dotted_key.split(".")
        nested: Dict[str, Any] = {parts[-1]: value}
        for part in reversed(parts[:-1]):
            nested = {part: nested}
        self.merge(nested)

    def apply_overrides(self, overrides: Iterable[str]) -> None:
        """Apply ``section.key=value`` strings, parsing values as YAML scalars."""
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"Override must look like section.key=value, got {item!r}")
            key, raw = item.split("=", 1)
            self.set(key.strip(), yaml.safe_load(raw))

    def validate(self) -> None:
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"dtype must be float32 or float64, got {self.dtype!r}")
        if self.vocab_size < 8:
            raise ConfigError("vocab_size must be at least 8")
        self.encoder.validate()
        self.transducer.validate()
        self.delib.validate()
        self.specaug.validate()
        self.search.validate()
        self.train.validate()

    def to_dict(self) -> Dict[str, Any]:
        return _to_mapping(self)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def load_config(
    config_path: Optional[str] = None,
    preset: Optional[str] = None,
    overrides: Iterable[str] = (),
) -> Config:
    """Build the effective config: defaults, then preset, then file, then overrides."""
    cfg = Config.from_preset(preset) if preset else Config()
    if config_path:
        cfg.merge(_read_yaml(Path(config_path)))
    cfg.apply_overrides(overrides)
    cfg.validate()
    return cfg


def preset_names() -> List[str]:
    """Names of the presets shipped with the package."""
    folder = resources.files("deliberpy.presets")
    return sorted(p.name[: -len(".yaml")] for p in folder.iterdir() if p.name.endswith(".yaml"))


def load_preset_data(name: str) -> Dict[str, Any]:
    # accept "presets/B1" and "B1.yaml" spellings
    stem = Path(name).name
    if stem.endswith(".yaml"):
        stem = stem[: -len(".yaml")]
    resource = resources.files("deliberpy.presets").joinpath(f"{stem}.yaml")
    if not resource.is_file():
        raise ConfigError(f"Unknown preset {name!r}; available: {', '.join(preset_names())}")
    data = yaml.safe_load(resource.read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"Preset {name!r} must be a mapping")
    return data


def _read_yaml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Malformed YAML in {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must contain a mapping")
    # run directories echo extra bookkeeping keys next to the config
    data.pop("version", None)
    data.pop("run", None)
    return data


def _apply_mapping(target: Any, data: Dict[str, Any], prefix: str) -> None:
    fields = {f.name: f for f in dataclasses.fields(target)}
    for raw_key, value in data.items():
        key = _ALIASES.get(raw_key, raw_key)
        dotted = f"{prefix}{raw_key}"
        if key not in fields:
            raise ConfigError(f"Unknown config key: {dotted}")
        current = getattr(target, key)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise ConfigError(f"Config section {dotted} must be a mapping")
            _apply_mapping(current, value, prefix=f"{dotted}.")
        else:
            setattr(target, key, _coerce(dotted, current, value))


def _coerce(dotted: str, current: Any, value: Any) -> Any:
    if isinstance(current, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{dotted} expects true/false, got {value!r}")
        return value
    if isinstance(current, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{dotted} expects an integer, got {value!r}")
        return value
    if isinstance(current, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{dotted} expects a number, got {value!r}")
        return float(value)
    if isinstance(current, str):
        if not isinstance(value, str):
            raise ConfigError(f"{dotted} expects a string, got {value!r}")
        return value
    raise ConfigError(f"Unsupported config value for {dotted}")


def _to_mapping(obj: Any) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        key = _REVERSE_ALIASES.get(f.name, f.name)
        out[key] = _to_mapping(value) if dataclasses.is_dataclass(value) else value
    return out


def _positive(section: Any, *names: str) -> None:
    for name in names:
        if getattr(section, name) <= 0:
            raise ConfigError(f"{type(section).__name__}.{name} must be positive")
