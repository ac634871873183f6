"""Tabular scan results and their CSV/JSON serialization."""

import csv
import io
import json
import math
from dataclasses import dataclass, field


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    try:
        return format(float(value), ".17g")
    except (TypeError, ValueError):
        return str(value)


def _plain(value):
    """Convert numpy scalars to builtin types for JSON."""
    if hasattr(value, "item") and not isinstance(value, (list, tuple, dict)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


@dataclass
class ScanReport:
    """Rows of a scan under fixed column names, plus free-form metadata.

    The CSV form has one header line with ``columns``; the JSON form is
    ``{"columns": [...], "rows": [{col: value, ...}, ...], "meta": {...}}``.
    """

    columns: tuple
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row {row!r} does not match columns {self.columns!r}")

    def append(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(tuple(values))

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def __len__(self):
        return len(self.rows)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self):
        doc = {
            "columns": list(self.columns),
            "rows": [{c: _plain(v) for c, v in zip(self.columns, row)} for row in self.rows],
            "meta": {k: _plain(v) for k, v in self.meta.items()},
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        cols = doc["columns"]
        rows = [tuple(r[c] for c in cols) for r in doc["rows"]]
        return cls(cols, rows, doc.get("meta", {}))

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.reader(io.StringIO(text)))
        cols = rows[0]
        parsed = []
        for row in rows[1:]:
            out = []
            for v in row:
                try:
                    out.append(float(v))
                except ValueError:
                    out.append(v)
            parsed.append(tuple(out))
        return cls(cols, parsed)


def emit_report(report, fmt="csv", path=None):
    """Serialize ``report`` and write it to ``path`` (stdout when None).

    Returns the path written, or None for stdout.
    """
    if fmt == "csv":
        text = report.to_csv()
    elif fmt == "json":
        text = report.to_json()
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
        return None
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path
