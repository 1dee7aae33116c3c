"""Frame stacking: 10-ms 80-D frames to 30-ms 240-D vectors."""

import numpy as np

from deliberpy.core.errors import ValidationError
from deliberpy.core.models import FeatureMatrix

RAW_DIM = 80
STACK_FACTOR = 3


def stack_frames(raw: FeatureMatrix, factor: int = STACK_FACTOR) -> FeatureMatrix:
    """Concatenate each group of ``factor`` frames into one vector.

    A partial final group is filled by repeating the last frame, so the
    output has ``ceil(T / factor)`` frames and every output value is a copy
    of some input value.
    """
    if raw.dim != RAW_DIM:
        raise ValidationError(f"stack_frames expects {RAW_DIM}-D input, got {raw.dim}")
    if raw.frame_rate_ms != 10:
        raise ValidationError(f"stack_frames expects 10-ms frames, got {raw.frame_rate_ms} ms")
    steps = raw.num_frames
    out_steps = -(-steps // factor)
    index = np.minimum(np.arange(out_steps * factor), steps - 1)
    stacked = raw.frames[index].reshape(out_steps, factor * raw.dim)
    return FeatureMatrix(stacked, raw.frame_rate_ms * factor, raw.utterance_id, raw.language_id)
