"""Deterministic CSV/JSON emission for the CLI.

Output is a pure function of the run configuration: no timestamps, fixed
column order, floats at 17 significant digits in CSV (round-trippable
doubles) and shortest-round-trip doubles in JSON.  Divergent values are
the literal token ``inf`` in CSV; in JSON they become null plus a sibling
``<column>_divergent`` boolean.  Undefined cells are empty in CSV and
null in JSON.
"""

from __future__ import annotations

import io
import json
import math
import sys
from dataclasses import dataclass, field


@dataclass
class Table:
    """Rows of plain-typed cells with a frozen column order."""

    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    divergent_columns: tuple[str, ...] = ()


@dataclass
class OutputEnvelope:
    metadata: dict
    table: Table


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    return str(value)


def render_csv(envelope: OutputEnvelope) -> str:
    table = envelope.table
    buf = io.StringIO()
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_csv_cell(row.get(col)) for col in table.columns) + "\n")
    return buf.getvalue()


def _json_value(value):
    if isinstance(value, float) and (math.isinf(value) or math.isnan(value)):
        return None
    return value


def render_json(envelope: OutputEnvelope) -> str:
    table = envelope.table
    rows = []
    for row in table.rows:
        obj = {}
        for col in table.columns:
            value = row.get(col)
            obj[col] = _json_value(value)
            if col in table.divergent_columns:
                obj[f"{col}_divergent"] = bool(
                    isinstance(value, float) and math.isinf(value)
                )
        rows.append(obj)
    return json.dumps({"metadata": envelope.metadata, "rows": rows}, indent=2) + "\n"


def write_output(envelope: OutputEnvelope, out_path: str | None, fmt: str) -> None:
    """Render and write to a file (LF endings) or stdout."""
    if fmt == "csv":
        text = render_csv(envelope)
    elif fmt == "json":
        text = render_json(envelope)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
