"""Feature manifest + binary blob I/O.

A split is stored as two adjacent files:

- ``<split>.manifest``: one line per utterance,
  ``id<TAB>language<TAB>T<TAB>D<TAB>byte_offset``
- ``<split>.feats``: the T x D matrices as little-endian float32, row-major,
  concatenated in manifest order.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np

from deliberpy.core.errors import ValidationError
from deliberpy.core.models import FeatureMatrix

_F32 = np.dtype("<f4")


@dataclass(frozen=True)
class ManifestEntry:
    utterance_id: str
    language_id: str
    num_frames: int
    dim: int
    offset: int

    def to_line(self) -> str:
        return f"{self.utterance_id}\t{self.language_id}\t{self.num_frames}\t{self.dim}\t{self.offset}"


def write_features(manifest_path: Union[str, Path], blob_path: Union[str, Path], feats: Iterable[FeatureMatrix]) -> List[ManifestEntry]:
    """Write feature matrices and their manifest; returns the entries written."""
    entries: List[ManifestEntry] = []
    offset = 0
    with open(blob_path, "wb") as blob:
        for fm in feats:
            data = np.ascontiguousarray(fm.frames, dtype=_F32)
            blob.write(data.tobytes())
            entries.append(ManifestEntry(fm.utterance_id, fm.language_id, data.shape[0], data.shape[1], offset))
            offset += data.nbytes
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as f:
        for entry in entries:
            f.write(entry.to_line() + "\n")
    return entries


def read_manifest(manifest_path: Union[str, Path]) -> List[ManifestEntry]:
    entries: List[ManifestEntry] = []
    with open(manifest_path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ValidationError(f"{manifest_path}:{line_no}: expected 5 tab-separated fields")
            try:
                entries.append(ManifestEntry(parts[0], parts[1], int(parts[2]), int(parts[3]), int(parts[4])))
            except ValueError as e:
                raise ValidationError(f"{manifest_path}:{line_no}: {e}") from e
    return entries


def read_features(manifest_path: Union[str, Path], blob_path: Union[str, Path, None] = None) -> List[FeatureMatrix]:
    """Load every utterance listed in a manifest at the 10-ms rate."""
    manifest_path = Path(manifest_path)
    blob_path = Path(blob_path) if blob_path else manifest_path.with_suffix(".feats")
    entries = read_manifest(manifest_path)
    blob = np.fromfile(blob_path, dtype=_F32)
    out: List[FeatureMatrix] = []
    for entry in entries:
        start = entry.offset // _F32.itemsize
        count = entry.num_frames * entry.dim
        if entry.offset % _F32.itemsize or start + count > blob.size:
            raise ValidationError(f"Bad offset for utterance {entry.utterance_id} in {blob_path}")
        frames = blob[start : start + count].reshape(entry.num_frames, entry.dim).astype(np.float32)
        out.append(FeatureMatrix(frames, 10, entry.utterance_id, entry.language_id))
    return out
