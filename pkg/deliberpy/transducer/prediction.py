"""Label-conditioned prediction network."""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.autodiff.tensor import Tensor
from deliberpy.core.config import TransducerConfig
from deliberpy.core.errors import ValidationError
from deliberpy.nn.layers import Embedding
from deliberpy.nn.module import Module, ModuleList
from deliberpy.nn.recurrent import LSTMP, LSTMState
from deliberpy.tokenizer.wordpiece import BLANK, SOS

PredictionState = List[LSTMState]


class PredictionNetwork(Module):
    """Embedding followed by stacked projected LSTMs.

    Position ``u`` of the output summarizes ``[sos] + labels[:u]``.
    """

    def __init__(self, rng: SeededRNG, cfg: TransducerConfig, vocab_size: int):
        super().__init__()
        self.vocab_size = vocab_size
        self.out_dim = cfg.pred_proj
        self.embedding = Embedding(rng, vocab_size, cfg.embed_dim)
        layers = []
        in_dim = cfg.embed_dim
        for _ in range(cfg.pred_layers):
            layers.append(LSTMP(rng, in_dim, cfg.pred_dim, cfg.pred_proj))
            in_dim = cfg.pred_proj
        self.layers = ModuleList(layers)

    @staticmethod
    def count(cfg: TransducerConfig, vocab_size: int) -> int:
        total = Embedding.count(vocab_size, cfg.embed_dim)
        in_dim = cfg.embed_dim
        for _ in range(cfg.pred_layers):
            total += LSTMP.count(in_dim, cfg.pred_dim, cfg.pred_proj)
            in_dim = cfg.pred_proj
        return total

    def _check(self, labels: Sequence[int]) -> np.ndarray:
        ids = np.asarray(labels, dtype=np.int64)
        if np.any(ids == BLANK):
            raise ValidationError("Prediction history must not contain blank")
        if ids.size and (ids.min() < 0 or ids.max() >= self.vocab_size):
            raise ValidationError("Prediction history id outside the vocabulary")
        return ids

    def __call__(self, labels: Sequence[int]) -> Tensor:
        """Prediction states for every prefix, shape (U+1, pred_proj)."""
        ids = np.concatenate([[SOS], self._check(labels)])
        x = self.embedding(ids)
        for layer in self.layers:
            x = layer(x)
        return x

    def step(self, token: int, state: Optional[PredictionState] = None) -> Tuple[Tensor, PredictionState]:
        """Feed one token (``sos`` first) and return the new output and state."""
        self._check([token])
        x = self.embedding(np.array([token]))
        new_state: PredictionState = []
        for i, layer in enumerate(self.layers):
            h, c = layer.step(x, state[i] if state is not None else None)
            new_state.append((h, c))
            x = h
        return x, new_state


def predict(network: PredictionNetwork, history: Sequence[int]) -> Tensor:
    return network(history)
