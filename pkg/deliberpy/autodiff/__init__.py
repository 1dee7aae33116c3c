"""Minimal dense-tensor math with reverse-mode differentiation."""

from deliberpy.autodiff import ops
from deliberpy.autodiff.checkpoint import load_checkpoint, save_checkpoint
from deliberpy.autodiff.ops import forward_op
from deliberpy.autodiff.rng import SeededRNG, seeded_rng
from deliberpy.autodiff.tensor import (
    Graph,
    Tensor,
    backward,
    debug_mode,
    get_default_dtype,
    no_grad,
    precision,
    set_default_dtype,
)

__all__ = [
    "Graph",
    "SeededRNG",
    "Tensor",
    "backward",
    "debug_mode",
    "forward_op",
    "get_default_dtype",
    "load_checkpoint",
    "no_grad",
    "ops",
    "precision",
    "save_checkpoint",
    "seeded_rng",
    "set_default_dtype",
]
