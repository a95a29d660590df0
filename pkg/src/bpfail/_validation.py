"""Input validation helpers shared by the functional core and the estimators."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


def check_matrix(X, name: str = "X", min_rows: int = 1, min_cols: int = 1) -> np.ndarray:
    """Return `X` as a finite 2-D float64 array.

    Raises
    ------
    ValueError
        If `X` is not 2-D, is too small, or holds NaN/Inf entries.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < min_rows or arr.shape[1] < min_cols:
        raise ValueError(
            f"{name} must have at least {min_rows} row(s) and {min_cols} column(s), "
            f"got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def check_vector(u, name: str = "u", size: int | None = None) -> np.ndarray:
    arr = np.asarray(u, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if size is not None and arr.shape[0] != size:
        raise ValueError(f"{name} must have length {size}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def check_index_tuple(values: Iterable[int], bound: int, name: str = "index tuple") -> tuple[int, ...]:
    """Validate a strictly increasing tuple of 1-based indices and return it.

    The public interface uses 1-based indices throughout; callers convert to
    0-based with ``np.asarray(t) - 1``.
    """
    tup = tuple(int(v) for v in values)
    if not tup:
        raise ValueError(f"{name} must be nonempty")
    if tup[0] < 1 or tup[-1] > bound:
        raise IndexError(f"{name} {tup} out of bounds (1..{bound})")
    if any(b <= a for a, b in zip(tup, tup[1:])):
        raise ValueError(f"{name} {tup} must be strictly increasing")
    return tup


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    return value


def to_zero_based(tup: Sequence[int]) -> np.ndarray:
    return np.asarray(tup, dtype=np.intp) - 1
