"""Stable JSON and CSV rendering of reports."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Any, Iterable, Sequence

SCHEMA_VERSION = 1


def _plain(value: Any) -> Any:
    """Convert report values to JSON-native types."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(_plain(v) for v in value)
    if hasattr(value, "item") and callable(value.item):  # numpy scalars
        return value.item()
    return value


def to_json(payload: dict, kind: str) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, **_plain(payload)}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def to_jsonl(rows: Iterable[dict]) -> str:
    """One compact JSON object per line."""
    return "".join(json.dumps(_plain(r), sort_keys=True, separators=(",", ":")) + "\n" for r in rows)


def to_csv(rows: Iterable[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(v) for k, v in _plain(row).items()})
    return buf.getvalue()


def _csv_cell(v: Any) -> Any:
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return v
