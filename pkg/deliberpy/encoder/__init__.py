"""Causal conformer encoder plus cascaded non-causal encoder."""

from deliberpy.encoder.cascaded import AudioEncoder, CascadedEncoder, cascade_encode, causal_encode
from deliberpy.encoder.conformer import CausalEncoder, ConformerLayer, time_stack

__all__ = [
    "AudioEncoder",
    "CascadedEncoder",
    "CausalEncoder",
    "ConformerLayer",
    "cascade_encode",
    "causal_encode",
    "time_stack",
]
