"""
Command reports
Rows with a fixed column order plus summary lines and provenance metadata,
rendered as text, CSV or JSON
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from . import __version__
from .models import OutputFormat, RunConfig


def format_value(value: Any) -> str:
    """CSV cell: shortest round-trip decimal for floats, empty for missing values"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


@dataclass
class Report:
    """Result of one command"""
    command: str
    columns: List[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    summary: List[str] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def for_config(cls, config: RunConfig, columns: List[str]) -> "Report":
        return cls(
            command=config.command.value,
            columns=columns,
            meta={
                "command": config.command.value,
                "seed": config.seed,
                "version": __version__,
                "config_hash": config.config_hash(),
            },
        )

    def add_row(self, **values: Any) -> None:
        unknown = set(values) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown report columns {sorted(unknown)}")
        self.rows.append({column: values.get(column) for column in self.columns})

    def ok(self, message: str) -> None:
        self.summary.append(f"✅ {message}")

    def alert(self, message: str) -> None:
        self.summary.append(f"🚨 {message}")

    def note(self, message: str) -> None:
        self.summary.append(f"   {message}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "meta": self.meta,
            "summary": self.summary,
            "rows": [{k: _json_value(v) for k, v in row.items()} for row in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(row[column]) for column in self.columns])
        return buffer.getvalue()

    def to_text(self) -> str:
        lines = [f"weakbell {self.command}"]
        lines.extend(self.summary)
        if self.rows:
            cells = [[format_value(row[c]) for c in self.columns] for row in self.rows]
            widths = [max(len(c), *(len(r[k]) for r in cells)) for k, c in enumerate(self.columns)]
            lines.append("")
            lines.append("  ".join(c.ljust(w) for c, w in zip(self.columns, widths)).rstrip())
            for r in cells:
                lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
        return "\n".join(lines) + "\n"

    def render(self, fmt: Optional[OutputFormat] = None) -> str:
        fmt = OutputFormat(fmt or OutputFormat.TEXT)
        if fmt is OutputFormat.CSV:
            return self.to_csv()
        if fmt is OutputFormat.JSON:
            return self.to_json()
        return self.to_text()
