"""Feature I/O, frame stacking and SpecAug."""

from deliberpy.frontend.augment import spec_augment
from deliberpy.frontend.features import read_features, read_manifest, write_features
from deliberpy.frontend.stacking import stack_frames

__all__ = ["read_features", "read_manifest", "spec_augment", "stack_frames", "write_features"]
