"""experiment command: the full pipeline over several seeds."""

import click

from deliberpy.cli.options.common import (
    add_config_options,
    add_workers_option,
    command_logger,
    handle_errors,
    resolve_config,
)
from deliberpy.cli.types import SEED_LIST
from deliberpy.core.handlers import experiment as run_experiment


@click.command(name="experiment")
@click.option("--seeds", type=SEED_LIST, default="1,2,3", show_default=True, help="Seeds, e.g. '1,2,3' or '1-5'.")
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False), required=True, help="Experiment directory.")
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Corpus spec YAML.")
@click.option("--steps", type=click.IntRange(min=1), default=None, help="First-pass training steps.")
@click.option("--delib-steps", type=click.IntRange(min=1), default=None, help="Deliberation training steps.")
@click.option("--split", type=click.Choice(["dev", "test"]), default="dev", show_default=True)
@add_config_options
@add_workers_option
@click.pass_context
def experiment(
    ctx: click.Context,
    seeds: list,
    out_dir: str,
    spec_path: str,
    steps: int,
    delib_steps: int,
    split: str,
    preset: str,
    overrides: tuple,
    workers: int,
) -> None:
    """Generate, train, decode, rescore and score once per seed.

    Prints per-seed WERs and the median relative improvement of rescoring
    over first-pass top-1.
    """
    logger = command_logger(ctx)
    with handle_errors(logger):
        cfg = resolve_config(ctx, preset, overrides)
        results = run_experiment(cfg, seeds, out_dir, spec_path, steps, delib_steps, split, workers, logger)
    for r in results:
        click.echo(f"{r.seed}\t{r.top1_wer:.2f}\t{r.rescored_wer:.2f}\t{r.relative_improvement:.2f}")
