"""Formatting utility functions for DeliberPy."""

from deliberpy.core.errors import ValidationError


def format_params(count: int) -> str:
    """Round a parameter count to millions, or billions from 1e9 on.

    Args:
        count: Exact number of parameters

    Returns:
        Formatted string like "174M" or "1B"
    """
    if count >= 1_000_000_000:
        value = count / 1e9
        return f"{value:.0f}B" if value >= 10 or abs(value - round(value)) < 0.05 else f"{value:.1f}B"
    return f"{round(count / 1e6)}M"


def parse_params(text: str) -> int:
    """Inverse of :func:`format_params` for table input ("143M", "1B", "1.2B")."""
    raw = text.strip().upper()
    scale = {"M": 1_000_000, "B": 1_000_000_000}.get(raw[-1:]) if raw else None
    try:
        return int(round(float(raw[:-1]) * scale)) if scale else int(raw)
    except ValueError as e:
        raise ValidationError(f"Cannot parse parameter count {text!r}") from e


def format_wer(value: float) -> str:
    """WER percentage with two decimals."""
    return f"{value:.2f}"


def format_duration(seconds: float) -> str:
    """Format duration in seconds to HH:MM:SS string."""
    hours = int(seconds // 3600)
    minutes = int((seconds % 3600) // 60)
    secs = int(seconds % 60)
    return f"{hours:02d}:{minutes:02d}:{secs:02d}"
