"""SpecAug time/frequency masking for raw features."""

from dataclasses import dataclass
from typing import List, Tuple

from deliberpy.autodiff.rng import SeededRNG
from deliberpy.core.errors import ValidationError
from deliberpy.core.models import FeatureMatrix


@dataclass
class MaskPlan:
    """Bands chosen for one utterance as (start, width) pairs."""

    freq: List[Tuple[int, int]]
    time: List[Tuple[int, int]]


def plan_masks(
    num_frames: int,
    dim: int,
    rng: SeededRNG,
    freq_masks: int = 2,
    max_freq: int = 27,
    time_masks: int = 2,
    max_time: int = 50,
) -> MaskPlan:
    if max_freq >= dim:
        raise ValidationError(f"max_freq ({max_freq}) must be smaller than the feature dimension ({dim})")
    plan = MaskPlan(freq=[], time=[])
    for _ in range(freq_masks):
        width = int(rng.integers(0, max_freq, endpoint=True))
        start = int(rng.integers(0, dim - width, endpoint=True))
        plan.freq.append((start, width))
    for _ in range(time_masks):
        width = min(int(rng.integers(0, max_time, endpoint=True)), num_frames)
        start = int(rng.integers(0, num_frames - width, endpoint=True))
        plan.time.append((start, width))
    return plan


def spec_augment(
    feats: FeatureMatrix,
    rng: SeededRNG,
    freq_masks: int = 2,
    max_freq: int = 27,
    time_masks: int = 2,
    max_time: int = 50,
) -> FeatureMatrix:
    """Zero up to ``freq_masks`` frequency bands and ``time_masks`` time bands.

    Widths are uniform on ``[0, max]`` inclusive and positions uniform over the
    valid offsets. Training code only; the input is not modified.
    """
    plan = plan_masks(feats.num_frames, feats.dim, rng, freq_masks, max_freq, time_masks, max_time)
    frames = feats.frames.copy()
    for start, width in plan.freq:
        frames[:, start : start + width] = 0.0
    for start, width in plan.time:
        frames[start : start + width, :] = 0.0
    return FeatureMatrix(frames, feats.frame_rate_ms, feats.utterance_id, feats.language_id)
