"""Shared CLI options for DeliberPy."""

from deliberpy.cli.options.common import (
    add_config_options,
    add_workers_option,
    command_logger,
    handle_errors,
    resolve_config,
)

__all__ = ["add_config_options", "add_workers_option", "command_logger", "handle_errors", "resolve_config"]
