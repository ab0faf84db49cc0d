"""CSV files with '#'-prefixed metadata headers, and small JSON helpers."""

from __future__ import annotations

import json
import os
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__

FLOAT_FMT = "%.17g"


def fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % value
    return str(value)


def write_csv(path, columns: Sequence[str], data: Iterable, meta: Mapping[str, object] | None = None) -> None:
    """Write column arrays as CSV; metadata goes first as '# key: value' lines."""
    header = {"tool": f"sususy {__version__}"}
    header.update(meta or {})
    cols = [np.asarray(c) for c in data]
    if len(cols) != len(columns):
        raise ValueError("column names and data disagree")
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("ragged columns")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in header.items():
            fh.write(f"# {key}: {fmt(value)}\n")
        fh.write(",".join(columns) + "\n")
        for row in zip(*cols):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_csv(path) -> tuple[dict[str, str], dict[str, np.ndarray]]:
    """Inverse of :func:`write_csv`; every data column is parsed as float."""
    meta: dict[str, str] = {}
    names = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.startswith("#"):
                if names is None and ":" in line:
                    key, value = line[1:].split(":", 1)
                    meta[key.strip()] = value.strip()
                continue
            if not line.strip():
                continue
            if names is None:
                names = [c.strip() for c in line.split(",")]
                continue
            fields = line.split(",")
            if len(fields) != len(names):
                raise ValueError(f"{path}:{lineno}: expected {len(names)} fields")
            try:
                rows.append([float(v) for v in fields])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric field") from None
    if names is None:
        raise ValueError(f"{path}: no header row")
    table = np.array(rows, dtype=float).reshape(-1, len(names))
    return meta, {name: table[:, i].copy() for i, name in enumerate(names)}


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return str(path)
