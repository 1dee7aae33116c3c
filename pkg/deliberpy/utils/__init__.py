"""Utility modules for DeliberPy."""

from deliberpy.utils.file_utils import directory_checksums, ensure_dir, file_checksum, require_file, sibling_path
from deliberpy.utils.format_utils import format_duration, format_params, format_wer, parse_params

__all__ = [
    "directory_checksums",
    "ensure_dir",
    "file_checksum",
    "format_duration",
    "format_params",
    "format_wer",
    "parse_params",
    "require_file",
    "sibling_path",
]
