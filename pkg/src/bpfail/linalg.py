"""Dense linear-algebra kernels.

Determinants of arbitrary minors go through LU with partial pivoting
(LAPACK ``getrf`` via :func:`numpy.linalg.det`).  Sweeps over *consecutive*
minors use repeated Dodgson condensation, which produces every consecutive
``j``-minor of an ``m x n`` matrix in ``O(j m n)`` flops.  Condensation divides
by interior minors and loses accuracy under cancellation, so each window
carries a running relative-error estimate; windows whose pivot is negligible
or whose estimate exceeds a budget are recomputed by LU.

All public functions take and return 1-based index tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.linalg
from numpy.lib.stride_tricks import sliding_window_view

from ._validation import check_index_tuple, check_matrix, check_vector, to_zero_based
from .exceptions import CompoundTooLargeError, ImageConditionError

__all__ = [
    "MinorSequence",
    "LeadingBlock",
    "antidiag_K",
    "compound",
    "consecutive_minors",
    "deadzone_sign",
    "forward_difference",
    "hadamard_bound",
    "leading_block_coeffs",
    "minor",
    "rank_estimate",
    "variation",
]

#: Condensation pivots below ``PIVOT_TOL * scale**order`` trigger an LU fallback.
PIVOT_TOL = 1e-12
#: Windows whose estimated relative condensation error exceeds this are redone by LU.
CONDENSATION_ERR_BUDGET = 1e-11
#: Minors with ``|det| <= SIGN_TOL * hadamard_bound`` count as zero.
SIGN_TOL = 1e-10
#: Default cap on the number of entries of a compound matrix.
MAX_COMPOUND_ENTRIES = 10**6

_EPS = np.finfo(np.float64).eps


def minor(X, rows, cols) -> float:
    """Determinant of the submatrix ``X[rows, cols]`` (1-based tuples).

    Examples
    --------
    >>> round(minor([[1, 2], [3, 4]], (1, 2), (1, 2)), 12)
    -2.0
    """
    X = check_matrix(X)
    rows = check_index_tuple(rows, X.shape[0], "rows")
    cols = check_index_tuple(cols, X.shape[1], "cols")
    if len(rows) != len(cols):
        raise ValueError(f"row tuple {rows} and column tuple {cols} differ in length")
    sub = X[np.ix_(to_zero_based(rows), to_zero_based(cols))]
    return float(np.linalg.det(sub))


def hadamard_bound(sub: np.ndarray) -> np.ndarray:
    """Product of row norms of square (stacked) submatrices, ``>= |det|``."""
    return np.prod(np.linalg.norm(sub, axis=-1), axis=-1)


def deadzone_sign(values, bounds, tol: float = SIGN_TOL) -> np.ndarray:
    """Signs in {-1, 0, +1}; zero when ``|value| <= tol * bound``."""
    values = np.asarray(values, dtype=np.float64)
    signs = np.sign(values).astype(np.int8)
    signs[np.abs(values) <= tol * np.asarray(bounds)] = 0
    return signs


def _tuples(n: int, r: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), r)), dtype=np.intp).reshape(-1, r)


def _compound(X: np.ndarray, r: int, max_entries: int) -> tuple[np.ndarray, np.ndarray]:
    m, n = X.shape
    if not 1 <= r <= min(m, n):
        raise ValueError(f"order r={r} out of range 1..{min(m, n)}")
    size = comb(m, r) * comb(n, r)
    if size > max_entries:
        raise CompoundTooLargeError(
            f"compound of order {r} for a {m}x{n} matrix has {size} entries "
            f"(cap {max_entries})"
        )
    row_t = _tuples(m, r)
    col_t = _tuples(n, r)
    values = np.empty((len(row_t), len(col_t)))
    bounds = np.empty_like(values)
    for i, rt in enumerate(row_t):
        # (r, n) -> (n_cols_tuples, r, r)
        subs = X[rt][:, col_t].transpose(1, 0, 2)
        values[i] = np.linalg.det(subs)
        bounds[i] = hadamard_bound(subs)
    return values, bounds


def compound(X, r: int, max_entries: int = MAX_COMPOUND_ENTRIES) -> np.ndarray:
    """The ``r``-th multiplicative compound matrix in lexicographic order.

    Entry ``(i, j)`` is ``det(X[I, J])`` for the ``i``-th and ``j``-th strictly
    increasing ``r``-tuples.  Refuses to build more than `max_entries` entries.
    """
    X = check_matrix(X)
    return _compound(X, int(r), max_entries)[0]


def compound_with_bounds(
    X, r: int, max_entries: int = MAX_COMPOUND_ENTRIES
) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`compound` but also returns the Hadamard bound of every minor."""
    X = check_matrix(X)
    return _compound(X, int(r), max_entries)


def compound_index(n: int, r: int) -> list[tuple[int, ...]]:
    """1-based ``r``-tuples of ``(1:n)`` in the order used by :func:`compound`."""
    return [tuple(int(v) + 1 for v in t) for t in _tuples(n, r)]


@dataclass(frozen=True)
class MinorSequence:
    """All consecutive ``order``-minors of a matrix.

    ``values[i, l]`` is the minor with rows ``i+1 .. i+order`` and columns
    ``l+1 .. l+order`` (1-based).  ``bounds`` holds the matching Hadamard
    bounds, used for the sign dead zone.
    """

    order: int
    values: np.ndarray
    bounds: np.ndarray
    fallbacks: int = 0

    @property
    def row_offsets(self) -> list[int]:
        return list(range(1, self.values.shape[0] + 1))

    @property
    def col_offsets(self) -> list[int]:
        return list(range(1, self.values.shape[1] + 1))

    def flat(self) -> np.ndarray:
        """Values in sweep order (row offset major, column offset minor)."""
        return self.values.ravel()

    def signs(self, tol: float = SIGN_TOL) -> np.ndarray:
        return deadzone_sign(self.values, self.bounds, tol)

    def window(self, i: int, l: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """1-based row and column tuples of the window at 0-based offsets."""
        j = self.order
        return tuple(range(i + 1, i + j + 1)), tuple(range(l + 1, l + j + 1))


def _window_bounds(X: np.ndarray, j: int) -> np.ndarray:
    m, n = X.shape
    sq = np.concatenate([np.zeros((m, 1)), np.cumsum(X**2, axis=1)], axis=1)
    row_norms = np.sqrt(np.maximum(sq[:, j:] - sq[:, :-j], 0.0))  # (m, n-j+1)
    return sliding_window_view(row_norms, (j, 1)).prod(axis=(-1, -2))


def consecutive_minors(X, j: int) -> MinorSequence:
    """Every minor built from ``j`` consecutive rows and ``j`` consecutive columns.

    Computed by repeated Dodgson condensation::

        M_k[i, l] = (M_{k-1}[i, l] M_{k-1}[i+1, l+1]
                     - M_{k-1}[i, l+1] M_{k-1}[i+1, l]) / M_{k-2}[i+1, l+1]

    A window falls back to LU when its pivot is below
    ``PIVOT_TOL * max|X|**(k-2)`` or when its running error estimate exceeds
    ``CONDENSATION_ERR_BUDGET``.  The number of fallbacks is reported.
    """
    X = check_matrix(X)
    m, n = X.shape
    j = int(j)
    if not 1 <= j <= min(m, n):
        raise ValueError(f"order j={j} out of range 1..{min(m, n)}")
    bounds = _window_bounds(X, j)
    if j == 1:
        return MinorSequence(1, X.copy(), bounds, 0)

    scale = float(np.max(np.abs(X)))
    if scale == 0.0:
        return MinorSequence(j, np.zeros((m - j + 1, n - j + 1)), bounds, 0)

    prev2 = np.ones((m + 1, n + 1))
    prev = X.copy()
    err2 = np.zeros_like(prev2)
    err = np.zeros_like(prev)
    fallbacks = 0
    for k in range(2, j + 1):
        a, d = prev[:-1, :-1], prev[1:, 1:]
        b, c = prev[:-1, 1:], prev[1:, :-1]
        ad, bc = a * d, b * c
        num = ad - bc
        piv = prev2[1:-1, 1:-1]
        mag = np.abs(ad) + np.abs(bc)
        with np.errstate(divide="ignore", invalid="ignore"):
            num_err = (
                np.abs(ad) * (err[:-1, :-1] + err[1:, 1:])
                + np.abs(bc) * (err[:-1, 1:] + err[1:, :-1])
                + _EPS * mag
            ) / np.abs(num)
            cur = num / piv
        cur_err = num_err + err2[1:-1, 1:-1] + _EPS
        bad = (np.abs(piv) < PIVOT_TOL * scale ** (k - 2)) | ~(cur_err <= CONDENSATION_ERR_BUDGET)
        if np.any(bad):
            idx = np.nonzero(bad)
            windows = sliding_window_view(X, (k, k))[idx]
            cur[idx] = np.linalg.det(windows)
            cur_err[idx] = 0.0
            if k == j:
                fallbacks += int(bad.sum())
        prev2, prev = prev, cur
        err2, err = err, cur_err
    return MinorSequence(j, prev, bounds, fallbacks)


def variation(u, tol: float = 0.0) -> int:
    """Number of strict sign changes after deleting zeros; ``-1`` for the zero vector.

    Entries with ``|u_i| <= tol`` count as zeros.
    """
    u = check_vector(u)
    nz = u[np.abs(u) > tol]
    if nz.size == 0:
        return -1
    s = np.sign(nz)
    return int(np.count_nonzero(s[1:] != s[:-1]))


def forward_difference(X) -> np.ndarray:
    """Row forward difference: row ``i`` of the result is ``X[i+1] - X[i]``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    X = check_matrix(X)
    if X.shape[0] < 2:
        raise ValueError("forward difference needs at least two rows")
    return np.diff(X, axis=0)


def antidiag_K(m: int) -> np.ndarray:
    """Anti-diagonal sign matrix with ``K[i, m-1-i] = (-1)**(m-1-i)`` (0-based)."""
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    K = np.zeros((m, m))
    for i in range(m):
        K[i, m - 1 - i] = (-1.0) ** (m - 1 - i)
    return K


def rank_estimate(X, tol: float = 1e-10) -> int:
    """Numerical rank from a column-pivoted QR factorization.

    A diagonal entry of ``R`` counts when it exceeds ``tol`` times the largest
    column norm of `X`.
    """
    X = check_matrix(X)
    if tol <= 0:
        raise ValueError("tol must be > 0")
    col_max = float(np.max(np.linalg.norm(X, axis=0)))
    if col_max == 0.0:
        return 0
    R = scipy.linalg.qr(X, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(R))
    return int(np.count_nonzero(diag > tol * col_max))


class LeadingBlock:
    """Factorization of the leading column block ``V[:, :r]``, reused across solves.

    Square blocks are factored by LU with partial pivoting; tall blocks by a
    column-pivoted QR and solved in the least-squares sense.

    Raises
    ------
    ImageConditionError
        If the leading block has numerical rank below `r`.
    """

    def __init__(self, V, r: int, rank_tol: float = 1e-10):
        V = check_matrix(V, "V")
        m, n = V.shape
        r = int(r)
        if not 1 <= r <= min(m, n):
            raise ValueError(f"r={r} out of range 1..{min(m, n)}")
        block = V[:, :r]
        if rank_estimate(block, rank_tol) < r:
            raise ImageConditionError(
                f"leading block V[:, 1:{r}] is rank deficient (image condition violated)"
            )
        self.V = V
        self.r = r
        self.square = m == r
        if self.square:
            self._lu = scipy.linalg.lu_factor(block)
        else:
            Q, R, perm = scipy.linalg.qr(block, mode="economic", pivoting=True)
            self._qr = (Q, R, perm)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Coefficients ``c`` with ``V[:, :r] c ~= rhs`` (rhs may be 2-D)."""
        rhs = np.asarray(rhs, dtype=np.float64)
        if self.square:
            return scipy.linalg.lu_solve(self._lu, rhs)
        Q, R, perm = self._qr
        z = scipy.linalg.solve_triangular(R, Q.T @ rhs)
        out = np.empty_like(z)
        out[perm] = z
        return out

    def coeffs(self, j: int) -> np.ndarray:
        """Coefficient vector for column `j` (1-based)."""
        n = self.V.shape[1]
        if not 1 <= j <= n:
            raise IndexError(f"column {j} out of range 1..{n}")
        if j <= self.r:
            e = np.zeros(self.r)
            e[j - 1] = 1.0
            return e
        return self.solve(self.V[:, j - 1])

    def all_coeffs(self) -> np.ndarray:
        """``r x n`` coefficient matrix; the first ``r`` columns are exactly ``I_r``."""
        out = np.empty((self.r, self.V.shape[1]))
        out[:, : self.r] = np.eye(self.r)
        if self.V.shape[1] > self.r:
            out[:, self.r :] = self.solve(self.V[:, self.r :])
        return out

    def relative_residuals(self, coeffs: np.ndarray) -> np.ndarray:
        """``||V1 c_k - v_k|| / ||v_k||`` per column (0 for zero columns)."""
        res = np.linalg.norm(self.V[:, : self.r] @ coeffs - self.V, axis=0)
        norms = np.linalg.norm(self.V, axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(norms > 0, res / norms, res)
        return rel


def leading_block_coeffs(V, r: int, j: int, rank_tol: float = 1e-10) -> np.ndarray:
    """Coefficients expressing column `j` of `V` in the leading ``r`` columns.

    Examples
    --------
    >>> leading_block_coeffs([[1, 1, 1], [1, 2, 4]], 2, 3)
    array([-2.,  3.])
    """
    return LeadingBlock(V, r, rank_tol).coeffs(int(j))
