"""Neural network layers on top of :mod:`deliberpy.autodiff`."""

from deliberpy.nn.attention import MultiHeadAttention
from deliberpy.nn.layers import Embedding, LayerNorm, Linear
from deliberpy.nn.module import Module, ModuleList
from deliberpy.nn.recurrent import BiLSTMP, LSTMP
from deliberpy.nn.transformer import FeedForward, TwoSourceDecoderLayer

__all__ = [
    "BiLSTMP",
    "Embedding",
    "FeedForward",
    "LSTMP",
    "LayerNorm",
    "Linear",
    "Module",
    "ModuleList",
    "MultiHeadAttention",
    "TwoSourceDecoderLayer",
]
