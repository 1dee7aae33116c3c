"""Common CLI options and helpers shared across commands."""

import sys
from contextlib import contextmanager
from typing import Iterator, Sequence

import click

from deliberpy.cli.types import OVERRIDE
from deliberpy.core.config import Config, load_config
from deliberpy.core.errors import DeliberpyError, exit_code_for
from deliberpy.core.logger import Logger


def add_config_options(func):
    """Add --preset and repeatable --set to a command that builds a config."""
    func = click.option(
        "--set",
        "overrides",
        type=OVERRIDE,
        multiple=True,
        help="Override one config value, e.g. --set train.steps=500 (repeatable).",
    )(func)
    func = click.option(
        "-p",
        "--preset",
        type=str,
        default=None,
        help="Start from a shipped preset (B0..B2, E0..E9, tiny, tiny-conformer).",
    )(func)
    return func


def add_workers_option(func):
    return click.option(
        "--workers",
        type=click.IntRange(min=1),
        default=1,
        show_default=True,
        help="Threads for per-utterance work; output does not depend on it.",
    )(func)


def command_logger(ctx: click.Context) -> Logger:
    obj = ctx.obj or {}
    return Logger(quiet=obj.get("quiet", False), verbose=obj.get("verbose", False))


def resolve_config(ctx: click.Context, preset: str, overrides: Sequence[str]) -> Config:
    """Defaults, then preset, then the global -c file, then --set values."""
    return load_config((ctx.obj or {}).get("config"), preset, overrides)


@contextmanager
def handle_errors(logger: Logger) -> Iterator[None]:
    """Log a failing command and exit with its mapped code."""
    try:
        yield
    except DeliberpyError as e:
        logger.error("%s", e)
        sys.exit(exit_code_for(e))
    except OSError as e:
        logger.error("%s", e)
        sys.exit(1)
