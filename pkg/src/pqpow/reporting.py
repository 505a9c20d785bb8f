"""Deterministic machine-readable report writers.

Every artifact this package emits goes through these helpers so that a
replay with the same config and seed produces byte-identical files:
keys are sorted, floats use shortest round-trip repr, line endings are
``\n``, non-finite floats become the strings ``"inf"``/``"-inf"``/
``"nan"`` (JSON has no literal for them), and no timestamps or
environment details are ever embedded. Documents carry a
``schema_version`` field so golden files can detect layout changes.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import SCHEMA_VERSION

__all__ = [
    "sanitize",
    "dumps_json",
    "write_json",
    "format_value",
    "format_csv",
    "write_csv",
    "write_text",
    "aligned_table",
    "file_digest",
]


def sanitize(obj):
    """Make an object JSON-serializable and deterministic.

    Handles dataclasses, numpy scalars/arrays, mappings, sequences, and
    non-finite floats (mapped to their string names).
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return sanitize(dataclasses.asdict(obj))
    if isinstance(obj, np.generic):
        return sanitize(obj.item())
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    if isinstance(obj, bytes):
        return obj.hex()
    if isinstance(obj, Mapping):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj, key=repr) if isinstance(obj, (set, frozenset)) else obj
        return [sanitize(v) for v in items]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(doc) -> str:
    body = dict(sanitize(doc))
    body.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def write_json(path: str, doc) -> str:
    text = dumps_json(doc)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def format_value(value) -> str:
    """One CSV cell: shortest round-trip floats, plain ints, raw strings."""
    value = sanitize(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_csv(rows: Iterable[Mapping], columns: Sequence[str]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(row.get(col)) for col in columns))
    return "\n".join(lines) + "\n"


def write_csv(path: str, rows: Iterable[Mapping], columns: Sequence[str]) -> str:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(rows, columns))
    return path


def write_text(path: str, text: str) -> str:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def aligned_table(rows: Sequence[Sequence[str]], header: Sequence[str]) -> str:
    """Fixed-width text table (left-aligned first column, right the rest)."""
    table = [list(map(str, header))] + [list(map(str, row)) for row in rows]
    widths = [max(len(row[c]) for row in table) for c in range(len(header))]
    lines = []
    for idx, row in enumerate(table):
        cells = [
            row[0].ljust(widths[0]),
            *(cell.rjust(widths[c + 1]) for c, cell in enumerate(row[1:])),
        ]
        lines.append("  ".join(cells).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.blake2b(fh.read(), digest_size=16).hexdigest()
