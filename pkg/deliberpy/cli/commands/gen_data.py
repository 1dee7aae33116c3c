"""gen-data command: write a seeded synthetic multilingual corpus."""

import click

from deliberpy.cli.options.common import command_logger, handle_errors
from deliberpy.core.handlers import gen_data as run_gen_data


@click.command(name="gen-data")
@click.option(
    "--spec",
    "spec_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Corpus spec YAML. Defaults to the built-in three-language corpus.",
)
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False), required=True, help="Output directory.")
@click.option("--seed", type=int, default=None, help="Override the spec's seed.")
@click.pass_context
def gen_data(ctx: click.Context, spec_path: str, out_dir: str, seed: int) -> None:
    """Generate features, transcripts and splits into OUT."""
    logger = command_logger(ctx)
    with handle_errors(logger):
        counts = run_gen_data(spec_path, out_dir, seed, logger)
    logger.info("✅ Corpus written: %s", ", ".join(f"{k} {v}" for k, v in counts.items()))
