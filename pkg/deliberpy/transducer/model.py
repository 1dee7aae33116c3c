"""First-pass model: audio encoder, prediction network and joint network."""

from typing import Optional, Sequence, Tuple

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor, get_default_dtype
from deliberpy.core.config import Config, SpecAugConfig
from deliberpy.core.errors import ValidationError
from deliberpy.core.models import EncoderOutputs, FeatureMatrix
from deliberpy.encoder.cascaded import AudioEncoder
from deliberpy.frontend.augment import spec_augment
from deliberpy.frontend.stacking import stack_frames
from deliberpy.nn.module import Module
from deliberpy.transducer.joint import JointNetwork
from deliberpy.transducer.loss import rnnt_loss
from deliberpy.transducer.prediction import PredictionNetwork

DEFAULT_CAUSAL_PROB = 0.4


def select_encoder_source(
    outputs: EncoderOutputs,
    rng: SeededRNG,
    causal_prob: float = DEFAULT_CAUSAL_PROB,
    training: bool = True,
) -> Tuple[str, Tensor]:
    """Draw the encoder source for one training utterance.

    Returns the source name and the chosen sequence. Evaluation code picks
    its source explicitly and must not call this.
    """
    if not training:
        raise ValidationError("Encoder source sampling is only used in training mode")
    if not 0.0 <= causal_prob <= 1.0:
        raise ValidationError("causal_prob must lie in [0, 1]")
    name = "causal" if rng.bernoulli(causal_prob) else "noncausal"
    return name, outputs.source(name)


def prepare_features(
    raw: FeatureMatrix,
    rng: Optional[SeededRNG] = None,
    specaug: Optional[SpecAugConfig] = None,
) -> Tensor:
    """Optional SpecAug (training only), then frame stacking to 240-D."""
    if rng is not None and specaug is not None and specaug.enabled:
        raw = spec_augment(raw, rng, specaug.freq_masks, specaug.max_freq, specaug.time_masks, specaug.max_time)
    return Tensor(stack_frames(raw).frames, dtype=get_default_dtype())


class Transducer(Module):
    """Cascaded-encoder transducer; both encoder sources feed one joint network."""

    def __init__(self, rng: SeededRNG, cfg: Config):
        super().__init__()
        self.cfg = cfg
        self.encoder = AudioEncoder(rng, cfg.encoder)
        self.prediction = PredictionNetwork(rng, cfg.transducer, cfg.vocab_size)
        self.joint = JointNetwork(rng, cfg.encoder.dim, cfg.transducer.pred_proj, cfg.transducer.joint_dim, cfg.vocab_size)

    @staticmethod
    def count(cfg: Config) -> int:
        return (
            AudioEncoder.count(cfg.encoder)
            + PredictionNetwork.count(cfg.transducer, cfg.vocab_size)
            + JointNetwork.count(cfg.encoder.dim, cfg.transducer.pred_proj, cfg.transducer.joint_dim, cfg.vocab_size)
        )

    def encode(self, raw: FeatureMatrix) -> EncoderOutputs:
        return self.encoder(prepare_features(raw))

    def lattice(self, enc: Tensor, labels: Sequence[int]) -> Tensor:
        return self.joint(enc, self.prediction(labels))

    def utterance_loss(self, raw: FeatureMatrix, labels: Sequence[int], rng: SeededRNG) -> Tuple[Tensor, str]:
        """Training loss of one utterance; SpecAug and the source draw use ``rng``."""
        outputs = self.encoder(prepare_features(raw, rng.spawn(0), self.cfg.specaug))
        source, enc = select_encoder_source(outputs, rng.spawn(1), self.cfg.train.causal_source_prob, self.training)
        return rnnt_loss(self.lattice(enc, labels), labels), source
