"""params command: analytic parameter count of a config."""

import click

from deliberpy.cli.options.common import add_config_options, command_logger, handle_errors, resolve_config
from deliberpy.core.handlers import params_report
from deliberpy.utils.format_utils import format_params


@click.command(name="params")
@add_config_options
@click.option("--breakdown", is_flag=True, default=False, help="Also print one line per component.")
@click.pass_context
def params(ctx: click.Context, preset: str, overrides: tuple, breakdown: bool) -> None:
    """Print the exact parameter count and its rounded form."""
    logger = command_logger(ctx)
    with handle_errors(logger):
        cfg = resolve_config(ctx, preset, overrides)
        count = params_report(cfg, logger)
    if breakdown:
        for name, value in count.components.items():
            click.echo(f"{name}\t{value}\t{format_params(value)}")
    click.echo(f"total\t{count.total}\t{format_params(count.total)}")
