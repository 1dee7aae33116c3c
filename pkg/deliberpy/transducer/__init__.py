"""First-pass transducer: prediction network, joint network and loss."""

from deliberpy.transducer.joint import JointNetwork, join
from deliberpy.transducer.loss import rnnt_alpha_beta, rnnt_loss
from deliberpy.transducer.model import Transducer, prepare_features, select_encoder_source
from deliberpy.transducer.prediction import PredictionNetwork, predict

__all__ = [
    "JointNetwork",
    "PredictionNetwork",
    "Transducer",
    "join",
    "predict",
    "prepare_features",
    "rnnt_alpha_beta",
    "rnnt_loss",
    "select_encoder_source",
]
