"""Command-line interface for DeliberPy."""

from deliberpy.cli.main import cli

__all__ = ["cli"]
