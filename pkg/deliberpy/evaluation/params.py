"""Analytic parameter counts from a config, without building any weights."""

from dataclasses import dataclass, field
from typing import Dict

from deliberpy.core.config import Config
from deliberpy.deliberation.decoder import DeliberationDecoder
from deliberpy.deliberation.text_encoder import TextEncoder
from deliberpy.encoder.cascaded import CascadedEncoder
from deliberpy.encoder.conformer import CausalEncoder
from deliberpy.transducer.joint import JointNetwork
from deliberpy.transducer.prediction import PredictionNetwork


@dataclass
class ParamCount:
    components: Dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.components.values())

    @property
    def first_pass(self) -> int:
        return sum(v for k, v in self.components.items() if not k.startswith("delib."))

    @property
    def deliberation(self) -> int:
        return sum(v for k, v in self.components.items() if k.startswith("delib."))


def count_params(cfg: Config) -> ParamCount:
    """Exact count per component; deliberation parts only when enabled."""
    cfg.validate()
    components = {
        "encoder.causal": CausalEncoder.count(cfg.encoder),
        "encoder.cascaded": CascadedEncoder.count(cfg.encoder),
        "transducer.prediction": PredictionNetwork.count(cfg.transducer, cfg.vocab_size),
        "transducer.joint": JointNetwork.count(
            cfg.encoder.dim, cfg.transducer.pred_proj, cfg.transducer.joint_dim, cfg.vocab_size
        ),
    }
    if cfg.delib.enabled:
        text = cfg.delib.text_encoder
        components["delib.text_encoder"] = TextEncoder.count(text, cfg.vocab_size)
        components["delib.decoder"] = DeliberationDecoder.count(
            cfg.delib.decoder, cfg.encoder.dim, text.output_dim, cfg.vocab_size
        )
    return ParamCount(components)
