"""decode command: first-pass beam search into an n-best file."""

import click

from deliberpy.cli.options.common import add_workers_option, command_logger, handle_errors
from deliberpy.cli.types import OVERRIDE
from deliberpy.core.handlers import decode as run_decode


@click.command(name="decode")
@click.option("--ckpt", type=click.Path(exists=True), required=True, help="First-pass checkpoint or run directory.")
@click.option("--data", "data_dir", type=click.Path(exists=True, file_okay=False), required=True, help="Corpus directory.")
@click.option("--split", type=click.Choice(["train", "dev", "test"]), default="dev", show_default=True)
@click.option("-o", "--out", type=click.Path(dir_okay=False), required=True, help="N-best output file.")
@click.option("--beam", type=click.IntRange(min=1), default=None, help="Beam width (defaults to search.beam).")
@click.option(
    "--source",
    type=click.Choice(["causal", "noncausal"]),
    default=None,
    help="Encoder output to decode from (defaults to search.source).",
)
@click.option("--set", "overrides", type=OVERRIDE, multiple=True, help="Override a run config value (repeatable).")
@add_workers_option
@click.pass_context
def decode(
    ctx: click.Context,
    ckpt: str,
    data_dir: str,
    split: str,
    out: str,
    beam: int,
    source: str,
    overrides: tuple,
    workers: int,
) -> None:
    """Decode SPLIT with the checkpoint's EMA weights.

    Writes the n-best file and a '.top1.txt' transcript beside it.
    """
    overrides = list(overrides)
    if beam is not None:
        overrides.append(f"search.beam={beam}")
    if source is not None:
        overrides.append(f"search.source={source}")
    logger = command_logger(ctx)
    with handle_errors(logger):
        nbests = run_decode(ckpt, data_dir, out, split, overrides, workers, logger)
    logger.info("✅ Decoded %d utterances.", len(nbests))
