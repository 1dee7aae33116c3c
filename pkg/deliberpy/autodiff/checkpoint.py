"""Versioned container of named tensors.

Layout (all header integers little-endian uint32)::

    b"DLBRCKPT" | version | count
    per tensor: name_len | name (UTF-8) | kind | rank | extents... | data (row-major)

``kind`` 0 is little-endian float32 (weights, moments); kind 1 is
little-endian int64 (step counters). Version 1 files carry no kind field
and hold float32 data only; they are still readable.
"""

from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np

from deliberpy.core.errors import ValidationError

MAGIC = b"DLBRCKPT"
VERSION = 2
_U32 = np.dtype("<u4")
_F32 = np.dtype("<f4")
_I64 = np.dtype("<i8")
KIND_FLOAT32, KIND_INT64 = 0, 1
_KIND_DTYPES = {KIND_FLOAT32: _F32, KIND_INT64: _I64}


def _u32(*values: int) -> bytes:
    return np.asarray(values, dtype=_U32).tobytes()


def _kind_of(value: np.ndarray) -> int:
    if np.issubdtype(value.dtype, np.integer) or value.dtype == np.bool_:
        return KIND_INT64
    return KIND_FLOAT32


def encode_checkpoint(tensors: Mapping[str, np.ndarray]) -> bytes:
    parts = [MAGIC, _u32(VERSION, len(tensors))]
    for name, value in tensors.items():
        value = np.asarray(value)
        kind = _kind_of(value)
        array = np.ascontiguousarray(value, dtype=_KIND_DTYPES[kind])
        raw_name = name.encode("utf-8")
        parts.append(_u32(len(raw_name)))
        parts.append(raw_name)
        parts.append(_u32(kind, array.ndim, *array.shape))
        parts.append(array.tobytes())
    return b"".join(parts)


def decode_checkpoint(blob: bytes) -> Dict[str, np.ndarray]:
    if blob[: len(MAGIC)] != MAGIC:
        raise ValidationError("Not a deliberpy checkpoint (bad magic)")
    offset = len(MAGIC)

    def read_u32(n: int = 1) -> np.ndarray:
        nonlocal offset
        end = offset + 4 * n
        if end > len(blob):
            raise ValidationError("Truncated checkpoint")
        values = np.frombuffer(blob, dtype=_U32, count=n, offset=offset)
        offset = end
        return values

    version, count = (int(v) for v in read_u32(2))
    if version not in (1, VERSION):
        raise ValidationError(f"Unsupported checkpoint version {version}")
    tensors: Dict[str, np.ndarray] = {}
    for _ in range(count):
        name_len = int(read_u32()[0])
        name = blob[offset : offset + name_len].decode("utf-8")
        offset += name_len
        kind = int(read_u32()[0]) if version > 1 else KIND_FLOAT32
        if kind not in _KIND_DTYPES:
            raise ValidationError(f"Unknown data kind {kind} for tensor {name}")
        dtype = _KIND_DTYPES[kind]
        rank = int(read_u32()[0])
        shape = tuple(int(v) for v in read_u32(rank)) if rank else ()
        size = int(np.prod(shape)) if shape else 1
        if offset + dtype.itemsize * size > len(blob):
            raise ValidationError(f"Truncated data for tensor {name}")
        data = np.frombuffer(blob, dtype=dtype, count=size, offset=offset).reshape(shape)
        offset += dtype.itemsize * size
        tensors[name] = data.astype(np.int64 if kind == KIND_INT64 else np.float32)
    if offset != len(blob):
        raise ValidationError("Trailing bytes after checkpoint tensors")
    return tensors


def save_checkpoint(path: Union[str, Path], tensors: Mapping[str, np.ndarray]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(encode_checkpoint(tensors))
    tmp.replace(path)


def load_checkpoint(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"Checkpoint not found: {path}")
    return decode_checkpoint(path.read_bytes())
