"""File formats: CSV matrices, deterministic JSON and two-column text."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

__all__ = ["dumps", "read_matrix", "read_vector", "write_json", "write_matrix", "write_pairs"]


def read_matrix(path) -> np.ndarray:
    """Read a numeric CSV; ragged rows or non-numeric cells raise ValueError."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric entry") from exc
            if len(rows[-1]) != len(rows[0]):
                raise ValueError(f"{path}:{lineno}: expected {len(rows[0])} columns, got {len(row)}")
    if not rows:
        raise ValueError(f"{path}: empty matrix")
    return np.array(rows)


def read_vector(path) -> np.ndarray:
    """A vector stored as one row or one column of CSV."""
    M = read_matrix(path)
    if 1 not in M.shape:
        raise ValueError(f"{path}: expected a single row or column, got shape {M.shape}")
    return M.ravel()


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_matrix(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="") as fh:
        for row in M:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_pairs(path, values, start: int = 1) -> None:
    """Two-column text ``index value`` for plotting."""
    with open(path, "w") as fh:
        for i, v in enumerate(np.asarray(values, dtype=float), start=start):
            fh.write(f"{i} {_fmt(v)}\n")


def _normalize(obj):
    if isinstance(obj, np.ndarray):
        return _normalize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, level: int) -> str:
    obj = _normalize(obj)
    pad, inner = "  " * level, "  " * (level + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted(((str(k), v) for k, v in obj.items()), key=lambda kv: kv[0])
        body = ",\n".join(f"{inner}{json.dumps(k)}: {_encode(v, level + 1)}" for k, v in items)
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        body = ",\n".join(inner + _encode(v, level + 1) for v in obj)
        return "[\n" + body + "\n" + pad + "]"
    if isinstance(obj, float):
        return _fmt(obj) if math.isfinite(obj) else "null"
    return json.dumps(obj)


def dumps(obj) -> str:
    """JSON with sorted keys and every float written with 17 significant digits."""
    return _encode(obj, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))
