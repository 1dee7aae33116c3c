"""Joint network producing the alignment lattice."""

import numpy as np

from deliberpy.autodiff import ops
from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor
from deliberpy.core.errors import ShapeError
from deliberpy.nn.layers import Linear
from deliberpy.nn.module import Module


class JointNetwork(Module):
    """``log_softmax(W_out tanh(W_enc e_t + W_pred p_u) + b)`` over the full vocabulary."""

    def __init__(self, rng: SeededRNG, enc_dim: int, pred_dim: int, joint_dim: int, vocab_size: int):
        super().__init__()
        self.joint_dim = joint_dim
        self.enc_proj = Linear(rng, enc_dim, joint_dim)
        self.pred_proj = Linear(rng, pred_dim, joint_dim)
        self.output = Linear(rng, joint_dim, vocab_size)

    @staticmethod
    def count(enc_dim: int, pred_dim: int, joint_dim: int, vocab_size: int) -> int:
        return Linear.count(enc_dim, joint_dim) + Linear.count(pred_dim, joint_dim) + Linear.count(joint_dim, vocab_size)

    def __call__(self, enc: Tensor, pred: Tensor) -> Tensor:
        """Lattice of shape (T, U+1, V) from enc (T, D) and pred (U+1, P)."""
        if enc.ndim != 2 or pred.ndim != 2:
            raise ShapeError("Joint expects 2-D encoder and prediction sequences")
        e = ops.reshape(self.enc_proj(enc), (enc.shape[0], 1, self.joint_dim))
        p = ops.reshape(self.pred_proj(pred), (1, pred.shape[0], self.joint_dim))
        return ops.log_softmax(self.output(ops.tanh(ops.add(e, p))), axis=-1)

    def project_encoder(self, enc: Tensor) -> np.ndarray:
        return self.enc_proj(enc).data

    def project_prediction(self, pred: Tensor) -> np.ndarray:
        return self.pred_proj(pred).data

    def log_probs(self, enc_proj: np.ndarray, pred_proj: np.ndarray) -> np.ndarray:
        """Output distribution for already-projected inputs; no graph is built."""
        hidden = np.tanh(enc_proj + pred_proj)
        logits = hidden @ self.output.weight.data + self.output.bias.data
        peak = logits.max(axis=-1, keepdims=True)
        shifted = logits - peak
        return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def join(joint: JointNetwork, enc_frames: Tensor, pred_states: Tensor) -> Tensor:
    return joint(enc_frames, pred_states)
