"""File utility functions for DeliberPy."""

import hashlib
from pathlib import Path
from typing import Dict, Union

from deliberpy.core.errors import ValidationError

PathLike = Union[str, Path]


def ensure_dir(path: PathLike) -> Path:
    """Create ``path`` (and parents) if needed.

    Raises:
        ValidationError: If the directory cannot be created.
    """
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ValidationError(f"Cannot create directory {out}: {e}") from e
    return out


def require_file(path: PathLike, what: str = "file") -> Path:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"Missing {what}: {p}")
    return p


def file_checksum(path: PathLike) -> str:
    """SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def directory_checksums(directory: PathLike) -> Dict[str, str]:
    """Checksums of every file below ``directory``, keyed by relative path."""
    root = Path(directory)
    return {
        str(p.relative_to(root)): file_checksum(p) for p in sorted(root.rglob("*")) if p.is_file()
    }


def sibling_path(path: PathLike, suffix: str) -> Path:
    """``out/dev.nbest`` + ``.top1.txt`` -> ``out/dev.top1.txt``."""
    p = Path(path)
    return p.with_name(p.stem + suffix)
