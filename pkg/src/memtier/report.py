"""Deterministic CSV/JSON emitters: stable key order, 9 significant digits."""

from __future__ import annotations

import json
import math
from typing import Any, Iterable, Mapping, Sequence


def fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot emit non-finite value {value!r}")
        return format(value, ".9g")
    if value is None:
        return ""
    return str(value)


def _json(value: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(value, Mapping):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [pad + _json(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if value is None:
        return "null"
    if isinstance(value, (bool, int, float)):
        return fmt(value)
    return json.dumps(value)


def dumps(value: Any, indent: int = 2) -> str:
    """JSON text with insertion-ordered keys and floats at 9 significant digits."""
    return _json(value, indent, 0) + "\n"


def csv_text(rows: Sequence[Mapping[str, Any]], columns: Iterable[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0]) if rows else []
    columns = list(columns)
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_csv_cell(fmt(row.get(c))) for c in columns))
    return "\n".join(lines) + "\n"


def _csv_cell(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text
