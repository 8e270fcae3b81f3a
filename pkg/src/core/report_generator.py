"""
Functional Load Toolkit
Report Generator Module

Renders job results as TSV, JSON or markdown. Every float is rounded to a
fixed number of significant digits before rendering, so the formats carry
identical numbers and repeated runs produce byte-identical output.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

try:
    from jinja2 import Environment, FileSystemLoader
    HAS_JINJA2 = True
except ImportError:
    HAS_JINJA2 = False

from .. import __version__


logger = logging.getLogger(__name__)


SUPPORTED_FORMATS = ("tsv", "json", "markdown")


@dataclass
class Report:
    """Tabular result of one command."""

    command: str
    columns: List[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)

    def add_row(self, **values: Any) -> None:
        missing = [column for column in self.columns if column not in values]
        if missing:
            raise ValueError(f"row is missing columns: {', '.join(missing)}")
        self.rows.append({column: values[column] for column in self.columns})


def round_significant(value: float, digits: int = 12) -> float:
    """Round a float to ``digits`` significant digits (negative zero becomes 0.0)."""
    rounded = float(format(value, f".{digits}g"))
    return rounded if rounded != 0 else 0.0


class ReportGenerator:
    """
    Template-driven report renderer.
    Markdown output uses a Jinja2 template from the templates directory.
    """

    def __init__(self, templates_dir: Optional[Path] = None, significant_digits: int = 12):
        """
        Initialize the report generator.

        Args:
            templates_dir: Optional custom templates directory
            significant_digits: Precision of every rendered float
        """
        self.logger = logging.getLogger(__name__)
        self.significant_digits = significant_digits

        if templates_dir and templates_dir.exists():
            self.templates_dir = templates_dir
        else:
            self.templates_dir = Path(__file__).parent.parent / "templates"

        if HAS_JINJA2:
            self.jinja_env = Environment(
                loader=FileSystemLoader(str(self.templates_dir)),
                autoescape=False,
                keep_trailing_newline=True,
                trim_blocks=True,
                lstrip_blocks=True,
            )
        else:
            self.jinja_env = None
            self.logger.warning("Jinja2 not available - using plain markdown tables")

    def render(self, report: Report, format: str = "tsv") -> str:
        """
        Render a report.

        Args:
            report: Report to render
            format: One of tsv, json, markdown

        Returns:
            Rendered report, newline-terminated

        Raises:
            ValueError: Unsupported format
        """
        format = format.lower()
        if format not in SUPPORTED_FORMATS:
            raise ValueError(f"Unsupported report format: {format}")

        rows = [{column: self._normalize(row[column]) for column in report.columns} for row in report.rows]
        self.logger.debug(f"Rendering {report.command} report: {len(rows)} rows as {format}")

        if format == "json":
            return self._generate_json_report(report, rows)
        if format == "markdown":
            return self._generate_markdown_report(report, rows)
        return self._generate_tsv_report(report.columns, rows)

    def write(self, content: str, output_path: Path) -> None:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        self.logger.info(f"Report written to {output_path}")

    def _normalize(self, value: Any) -> Any:
        if isinstance(value, bool) or value is None:
            return value
        if isinstance(value, float):
            return round_significant(value, self.significant_digits)
        return value

    def _cell(self, value: Any) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if value is None:
            return ""
        if isinstance(value, float):
            return format(value, f".{self.significant_digits}g")
        return str(value)

    def _generate_tsv_report(self, columns: Sequence[str], rows: List[Dict[str, Any]]) -> str:
        lines = ["\t".join(columns)]
        for row in rows:
            lines.append("\t".join(self._cell(row[column]) for column in columns))
        return "\n".join(lines) + "\n"

    def _generate_json_report(self, report: Report, rows: List[Dict[str, Any]]) -> str:
        meta = dict(report.meta)
        meta.setdefault("command", report.command)
        meta.setdefault("version", __version__)
        return json.dumps({"meta": meta, "results": rows}, indent=2, sort_keys=True) + "\n"

    def _generate_markdown_report(self, report: Report, rows: List[Dict[str, Any]]) -> str:
        data = {
            "command": report.command,
            "version": __version__,
            "meta": {key: report.meta[key] for key in sorted(report.meta)},
            "columns": report.columns,
            "rows": [[self._cell(row[column]) for column in report.columns] for row in rows],
        }
        if self.jinja_env:
            template = self.jinja_env.get_template("report.md.j2")
            return template.render(**data)
        return self._generate_fallback_markdown(data)

    def _generate_fallback_markdown(self, data: Dict[str, Any]) -> str:
        lines = [f"# fload {data['command']}", ""]
        lines.append("| " + " | ".join(data["columns"]) + " |")
        lines.append("|" + "---|" * len(data["columns"]))
        for row in data["rows"]:
            lines.append("| " + " | ".join(row) + " |")
        return "\n".join(lines) + "\n"
