"""
Tabular output for the command-line tools.
CSV and JSON are meant for external plotting; "pretty" is an aligned text table.
Nothing time-dependent is written, so repeated runs produce identical files.
"""

import csv
import io
import json
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

import config
from repeater.common import ConfigError, log


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _pretty_value(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def render_csv(records: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
    output = io.StringIO()
    writer = csv.writer(output)
    writer.writerow(columns)
    for record in records:
        writer.writerow(["" if record.get(col) is None else record.get(col) for col in columns])
    return output.getvalue()


def render_json(records: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
    rows = [{col: _json_value(record.get(col)) for col in columns} for record in records]
    return json.dumps(rows, indent=2) + "\n"


def render_pretty(records: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
    cells: List[List[str]] = [list(columns)]
    cells += [[_pretty_value(record.get(col)) for col in columns] for record in records]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


RENDERERS = {
    "csv": render_csv,
    "json": render_json,
    "pretty": render_pretty,
}


def render_records(records: Sequence[Dict[str, Any]], columns: Sequence[str], fmt: str) -> str:
    if fmt not in config.OUTPUT_FORMATS:
        raise ConfigError(f"output: expected one of {config.OUTPUT_FORMATS}, got {fmt!r}")
    return RENDERERS[fmt](records, columns)


def write_records(records: Sequence[Dict[str, Any]], columns: Sequence[str], fmt: str,
                  path: Optional[str] = None) -> None:
    """Render and write to `path`, or to stdout when no path is given."""
    text = render_records(records, columns, fmt)
    if path:
        with open(path, "w", newline="") as f:
            f.write(text)
        log(f"Wrote {len(records)} rows to {path}")
    else:
        sys.stdout.write(text)
