"""Training commands for the first pass and the deliberation network."""

import click

from deliberpy.cli.options.common import add_config_options, command_logger, handle_errors, resolve_config
from deliberpy.core.handlers import train_delib as run_train_delib
from deliberpy.core.handlers import train_first_pass as run_train_first_pass


def _add_run_options(func):
    func = click.option(
        "--steps",
        type=click.IntRange(min=1),
        default=None,
        help="Train up to this step (defaults to train.steps).",
    )(func)
    func = click.option(
        "--resume",
        is_flag=True,
        default=False,
        help="Continue from the latest checkpoint in OUT.",
    )(func)
    func = click.option(
        "-o", "--out", "out_dir", type=click.Path(file_okay=False), required=True, help="Run directory."
    )(func)
    func = click.option(
        "--data", "data_dir", type=click.Path(exists=True, file_okay=False), required=True, help="Corpus directory."
    )(func)
    return func


@click.command(name="train-first-pass")
@_add_run_options
@add_config_options
@click.pass_context
def train_first_pass(
    ctx: click.Context,
    data_dir: str,
    out_dir: str,
    resume: bool,
    steps: int,
    preset: str,
    overrides: tuple,
) -> None:
    """Train the cascaded-encoder transducer on the train split."""
    logger = command_logger(ctx)
    with handle_errors(logger):
        cfg = resolve_config(ctx, preset, overrides)
        ckpt = run_train_first_pass(cfg, data_dir, out_dir, resume, steps, logger)
    logger.info("✅ First pass trained: %s", ckpt)


@click.command(name="train-delib")
@click.option(
    "--first-pass-ckpt",
    type=click.Path(exists=True),
    required=True,
    help="First-pass checkpoint (or its run directory); it stays frozen.",
)
@_add_run_options
@add_config_options
@click.pass_context
def train_delib(
    ctx: click.Context,
    first_pass_ckpt: str,
    data_dir: str,
    out_dir: str,
    resume: bool,
    steps: int,
    preset: str,
    overrides: tuple,
) -> None:
    """Train the deliberation rescorer on top of a frozen first pass."""
    logger = command_logger(ctx)
    with handle_errors(logger):
        cfg = resolve_config(ctx, preset, overrides)
        ckpt = run_train_delib(cfg, first_pass_ckpt, data_dir, out_dir, resume, steps, logger)
    logger.info("✅ Deliberation trained: %s", ckpt)
