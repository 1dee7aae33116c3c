"""Comparison tables of per-language WERs."""

from pathlib import Path
from typing import List, Sequence, Union

from deliberpy.core.errors import ValidationError
from deliberpy.core.logger import NULL_LOGGER, Logger
from deliberpy.core.models import WerReport
from deliberpy.evaluation.aggregate import aggregate
from deliberpy.utils.format_utils import format_params, format_wer, parse_params

AVG_ROW = "Avg. WER"
SIZE_ROW = "Size"


class TableRenderer:
    """Renders WerReports side by side: one column per model, one row per language."""

    def __init__(self, reports: Sequence[WerReport], logger: Logger = NULL_LOGGER):
        """Initialize the renderer.

        Args:
            reports: Reports to compare, in column order
            logger: Logger instance

        Raises:
            ValidationError: If no reports are given or their language sets differ.
        """
        if not reports:
            raise ValidationError("Nothing to render")
        languages = reports[0].languages
        for report in reports[1:]:
            if set(report.languages) != set(languages):
                raise ValidationError(
                    f"Report {report.model_id!r} covers {sorted(report.languages)}, expected {sorted(languages)}"
                )
        self.reports = list(reports)
        self.languages = list(languages)
        self.logger = logger

    def rows(self) -> List[List[str]]:
        header = ["Language"] + [r.model_id or f"#{i + 1}" for i, r in enumerate(self.reports)]
        body = [[lang] + [format_wer(r.per_language[lang]) for r in self.reports] for lang in self.languages]
        footer = [AVG_ROW] + [format_wer(aggregate(r.per_language)) for r in self.reports]
        rows = [header] + body + [footer]
        if any(r.param_count is not None for r in self.reports):
            rows.append([SIZE_ROW] + [format_params(r.param_count) if r.param_count else "-" for r in self.reports])
        return rows

    def render(self) -> str:
        rows = self.rows()
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]

        def line(row: List[str]) -> str:
            return "  ".join(
                cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i]) for i, cell in enumerate(row)
            ).rstrip()

        header, body, footer = rows[0], rows[1 : 1 + len(self.languages)], rows[1 + len(self.languages) :]
        rule = "-" * len(line(header))
        out = [line(header), rule] + [line(row) for row in body] + [rule] + [line(row) for row in footer]
        return "\n".join(out) + "\n"

    def render_tsv(self) -> str:
        """One line per model and language: ``model, language, S, I, D, ref_words, wer``."""
        lines = ["model\tlanguage\tS\tI\tD\tref_words\twer"]
        for report in self.reports:
            for lang in self.languages:
                counts = report.counts.get(lang)
                cells = (
                    [str(counts.substitutions), str(counts.insertions), str(counts.deletions), str(counts.ref_words)]
                    if counts
                    else ["", "", "", ""]
                )
                lines.append("\t".join([report.model_id, lang] + cells + [format_wer(report.per_language[lang])]))
        return "\n".join(lines) + "\n"

    def save(self, path: Union[str, Path]) -> Path:
        """Write the human table to ``path`` and the TSV beside it."""
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(self.render(), encoding="utf-8")
        tsv = out.with_suffix(".tsv")
        tsv.write_text(self.render_tsv(), encoding="utf-8")
        self.logger.verbose("Wrote %s and %s", out, tsv)
        return tsv


def render_table(reports: Sequence[WerReport]) -> str:
    return TableRenderer(reports).render()


def read_wer_columns(path: Union[str, Path]) -> List[WerReport]:
    """Reports from a published-style table.

    The file is tab-separated: a header ``language<TAB>model...``, one row per
    language, and optionally a ``Size`` row (``143M``) and an ``Avg. WER``
    row, which is ignored since it is recomputed.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            rows = [line.rstrip("\n").split("\t") for line in f if line.strip() and not line.startswith("#")]
    except OSError as e:
        raise ValidationError(f"Cannot read table {path}: {e}") from e
    if len(rows) < 2:
        raise ValidationError(f"Table {path} needs a header and at least one language row")
    models = rows[0][1:]
    reports = [WerReport(model_id=m, per_language={}) for m in models]
    for row in rows[1:]:
        if len(row) != len(models) + 1:
            raise ValidationError(f"Row {row[0]!r} of {path} has {len(row) - 1} values, expected {len(models)}")
        label, values = row[0], row[1:]
        if label == AVG_ROW:
            continue
        for report, value in zip(reports, values):
            if label == SIZE_ROW:
                report.param_count = parse_params(value)
            else:
                try:
                    report.per_language[label] = float(value)
                except ValueError as e:
                    raise ValidationError(f"Bad WER {value!r} for {label} in {path}") from e
    return reports
