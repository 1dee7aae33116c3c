"""rescore command: deliberation rescoring of a first-pass n-best file."""

import click

from deliberpy.cli.options.common import add_workers_option, command_logger, handle_errors
from deliberpy.cli.types import OVERRIDE
from deliberpy.core.handlers import rescore_nbest


@click.command(name="rescore")
@click.option(
    "--delib-ckpt", type=click.Path(exists=True), required=True, help="Deliberation checkpoint or run directory."
)
@click.option("--nbest", "nbest_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--data", "data_dir", type=click.Path(exists=True, file_okay=False), required=True, help="Corpus directory.")
@click.option("--split", type=click.Choice(["train", "dev", "test"]), default="dev", show_default=True)
@click.option("-o", "--out", type=click.Path(dir_okay=False), required=True, help="Reranked n-best output file.")
@click.option(
    "--lambda",
    "lam",
    type=click.FloatRange(0.0, 1.0),
    default=None,
    help="Weight of the first-pass score in the combined score (defaults to delib.lambda).",
)
@click.option("--seed", type=int, default=1, show_default=True, help="Seed of the sampled text context.")
@click.option(
    "--first-pass-ckpt",
    type=click.Path(exists=True),
    default=None,
    help="Frozen first pass (defaults to the one the deliberation run was trained on).",
)
@click.option("--set", "overrides", type=OVERRIDE, multiple=True, help="Override a run config value (repeatable).")
@add_workers_option
@click.pass_context
def rescore(
    ctx: click.Context,
    delib_ckpt: str,
    nbest_path: str,
    data_dir: str,
    split: str,
    out: str,
    lam: float,
    seed: int,
    first_pass_ckpt: str,
    overrides: tuple,
    workers: int,
) -> None:
    """Rerank NBEST with the deliberation network.

    Writes the reranked n-best (with a deliberation score column) and a
    '.selected.txt' transcript of the chosen hypotheses.
    """
    logger = command_logger(ctx)
    with handle_errors(logger):
        summary = rescore_nbest(
            delib_ckpt, nbest_path, data_dir, out, split, lam, seed, first_pass_ckpt, overrides, workers, logger
        )
    logger.info("✅ Rescored %d utterances: %s", len(summary.nbests), summary.selected_path)
