"""Rendering module for DeliberPy."""

from deliberpy.renderers.table_renderer import TableRenderer, read_wer_columns, render_table

__all__ = ["TableRenderer", "read_wer_columns", "render_table"]
