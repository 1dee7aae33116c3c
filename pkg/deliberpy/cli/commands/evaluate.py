"""evaluate command: per-language WER tables."""

import click

from deliberpy.cli.options.common import add_workers_option, command_logger, handle_errors
from deliberpy.core.errors import ValidationError
from deliberpy.core.handlers import evaluate as run_evaluate
from deliberpy.core.handlers import published_table


@click.command(name="evaluate")
@click.option(
    "--hyp",
    "hyp_paths",
    type=click.Path(exists=True, dir_okay=False),
    multiple=True,
    help="Hypothesis transcript; repeat to compare systems side by side.",
)
@click.option("--ref", "ref_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Reference transcript.")
@click.option(
    "--data",
    "data_dir",
    type=click.Path(exists=True, file_okay=False),
    default=None,
    help="Corpus directory; its logographic languages are scored by character.",
)
@click.option("--char-level", multiple=True, help="Also score this language by character (repeatable).")
@click.option(
    "--table",
    "table_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Re-aggregate per-language WER columns from a tab-separated table instead.",
)
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None, help="Also save the table (and a .tsv).")
@add_workers_option
@click.pass_context
def evaluate(
    ctx: click.Context,
    hyp_paths: tuple,
    ref_path: str,
    data_dir: str,
    char_level: tuple,
    table_path: str,
    out: str,
    workers: int,
) -> None:
    """Print per-language WERs and their unweighted average."""
    logger = command_logger(ctx)
    with handle_errors(logger):
        if table_path:
            if hyp_paths or ref_path:
                raise ValidationError("--table cannot be combined with --hyp/--ref")
            renderer = published_table(table_path, out, logger)
        else:
            if not ref_path:
                raise ValidationError("--ref is required when scoring hypotheses")
            renderer = run_evaluate(hyp_paths, ref_path, data_dir, out, char_level, workers, logger)
    click.echo(renderer.render(), nl=False)
