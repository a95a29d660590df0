"""Sign consistency, total positivity, variation bounding and sequence shape tests."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Iterator

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._validation import check_matrix, check_vector
from .exceptions import SingularBlockError
from .linalg import (
    MAX_COMPOUND_ENTRIES,
    SIGN_TOL,
    antidiag_K,
    compound_index,
    compound_with_bounds,
    consecutive_minors,
    deadzone_sign,
    hadamard_bound,
    rank_estimate,
)

__all__ = [
    "SequenceReport",
    "StructureReport",
    "Witness",
    "is_log_concave",
    "is_unimodal",
    "pena_minor_pairs",
    "pena_transform",
    "verify_pena_strict",
    "verify_sign_consistent",
    "verify_totally_positive",
    "verify_variation_bounding",
]


@dataclass(frozen=True)
class Witness:
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    value: float

    def to_dict(self) -> dict:
        return {"rows": list(self.rows), "cols": list(self.cols), "value": float(self.value)}


@dataclass
class StructureReport:
    """Outcome of a sign-consistency / total-positivity / variation-bounding check.

    ``holds`` is ``None`` when the chosen route cannot decide (``status`` then
    says why).  A ``False`` verdict always carries witnesses: one violating
    minor, or two minors of opposite strict sign for sign consistency.
    """

    property: str
    order: int
    holds: bool | None
    shared_sign: int = 0
    route: str = ""
    status: str = "decided"
    witnesses: list[Witness] = field(default_factory=list)
    fallbacks: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "order": self.order,
            "holds": self.holds,
            "shared_sign": self.shared_sign,
            "route": self.route,
            "status": self.status,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "fallbacks": self.fallbacks,
            "details": self.details,
        }


@dataclass
class SequenceReport:
    kind: str
    holds: bool
    peak_index: int | None = None
    violation_index: int | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "holds": self.holds,
            "peak_index": self.peak_index,
            "violation_index": self.violation_index,
        }


# ---------------------------------------------------------------------------
# sign consistency


def _sign_conflict(signs: np.ndarray) -> tuple[int, int] | None:
    """Flat positions of the first strict sign and the first opposite strict sign."""
    flat = signs.ravel()
    nz = np.flatnonzero(flat)
    if nz.size == 0:
        return None
    first = nz[0]
    opp = np.flatnonzero(flat == -flat[first])
    if opp.size == 0:
        return None
    return int(first), int(opp[0])


def _consecutive_route(W: np.ndarray, strict: bool, transposed: bool) -> StructureReport | None:
    """Karlin-type consecutive-minor test for the full-order case of a wide matrix.

    Returns ``None`` when the sufficient conditions are not met and no
    definitive violation was found, so the caller should fall back.
    """
    m, n = W.shape
    prop = "SSC" if strict else "SC"
    fallbacks = 0

    def wit(rows, cols, value) -> Witness:
        rows = tuple(int(r) for r in rows)
        cols = tuple(int(c) for c in cols)
        return Witness(cols, rows, value) if transposed else Witness(rows, cols, value)

    # full-order consecutive minors: contiguous column windows
    top = consecutive_minors(W, m)
    fallbacks += top.fallbacks
    signs = top.signs().ravel()
    conflict = _sign_conflict(signs)
    if conflict is not None:
        a, b = conflict
        ws = [wit(*top.window(0, a), top.values[0, a]), wit(*top.window(0, b), top.values[0, b])]
        return StructureReport(prop, m, False, 0, "consecutive", "decided", ws, fallbacks)
    if strict and np.any(signs == 0):
        z = int(np.flatnonzero(signs == 0)[0])
        ws = [wit(*top.window(0, z), top.values[0, z])]
        return StructureReport(prop, m, False, 0, "consecutive", "decided", ws, fallbacks)

    # leading row blocks of the wide matrix (column-initial minors of the tall
    # one): every consecutive s-minor of W[:s] strictly one-signed
    for s in range(1, m):
        ms = consecutive_minors(W[:s], s)
        fallbacks += ms.fallbacks
        sg = ms.signs().ravel()
        if np.any(sg == 0) or np.any(sg != sg[0]):
            return None
    nz = signs[signs != 0]
    shared = int(nz[0]) if nz.size else 0
    return StructureReport(prop, m, True, shared, "consecutive", "decided", [], fallbacks)


def _compound_route(X: np.ndarray, k: int, strict: bool, max_entries: int) -> StructureReport:
    prop = "SSC" if strict else "SC"
    values, bounds = compound_with_bounds(X, k, max_entries)
    signs = deadzone_sign(values, bounds)
    rows_t = compound_index(X.shape[0], k)
    cols_t = compound_index(X.shape[1], k)
    nc = len(cols_t)

    def wit(pos: int) -> Witness:
        i, j = divmod(pos, nc)
        return Witness(rows_t[i], cols_t[j], float(values[i, j]))

    conflict = _sign_conflict(signs)
    if conflict is not None:
        return StructureReport(prop, k, False, 0, "compound", "decided", [wit(p) for p in conflict])
    if strict and np.any(signs == 0):
        return StructureReport(
            prop, k, False, 0, "compound", "decided", [wit(int(np.flatnonzero(signs.ravel() == 0)[0]))]
        )
    nz = signs[signs != 0]
    shared = int(nz[0]) if nz.size else 0
    return StructureReport(prop, k, True, shared, "compound", "decided")


def verify_sign_consistent(
    X, k: int, strict: bool = False, max_entries: int = MAX_COMPOUND_ENTRIES
) -> StructureReport:
    """Decide whether every ``k``-minor of `X` shares one (strict) sign.

    When ``k`` equals the smaller dimension the consecutive-minor route is
    tried first.  Viewing the matrix as tall (``n x k``), strictly one-signed
    consecutive-row ``s``-minors of its first ``s`` columns for ``s < k`` plus
    one-signed consecutive ``k``-minors are sufficient.  Two consecutive
    ``k``-minors of opposite strict sign refute directly.  Otherwise every
    ``k``-minor is inspected through the compound matrix, subject to
    `max_entries`.

    Minors inside the dead zone (see :data:`bpfail.linalg.SIGN_TOL`) are
    compatible with either sign in the non-strict test and violate the strict
    one.
    """
    X = check_matrix(X)
    k = int(k)
    if not 1 <= k <= min(X.shape):
        raise ValueError(f"order k={k} out of range 1..{min(X.shape)}")
    if k == min(X.shape):
        transposed = X.shape[0] > X.shape[1]
        W = X.T if transposed else X
        rep = _consecutive_route(W, strict, transposed)
        if rep is not None:
            return rep
        rep = _compound_route(X, k, strict, max_entries)
        rep.route = "compound_fallback"
        return rep
    return _compound_route(X, k, strict, max_entries)


# ---------------------------------------------------------------------------
# total positivity


def verify_totally_positive(X, k: int, strict: bool = False) -> StructureReport:
    """Consecutive-minor test for (strict) ``k``-total positivity.

    Strict: all consecutive ``j``-minors strictly positive for ``j <= k`` is
    necessary and sufficient.  Non-strict: strictly positive consecutive
    ``j``-minors for ``j < k`` and nonnegative ones for ``j = k`` are only
    sufficient, so a zero below order ``k`` leaves the verdict open
    (``holds=None``) unless some minor is negative.
    """
    X = check_matrix(X)
    k = int(k)
    if not 1 <= k <= min(X.shape):
        raise ValueError(f"order k={k} out of range 1..{min(X.shape)}")
    prop = "STP" if strict else "TP"
    route = "consecutive" if strict else "consecutive_sufficient"
    fallbacks = 0
    undecided: Witness | None = None
    for j in range(1, k + 1):
        ms = consecutive_minors(X, j)
        fallbacks += ms.fallbacks
        sg = ms.signs()
        neg = np.argwhere(sg < 0)
        if neg.size:
            i, l = neg[0]
            w = Witness(*ms.window(i, l), float(ms.values[i, l]))
            return StructureReport(prop, k, False, 0, route, "decided", [w], fallbacks)
        zero = np.argwhere(sg == 0)
        if zero.size and (strict or j < k) and undecided is None:
            i, l = zero[0]
            undecided = Witness(*ms.window(i, l), float(ms.values[i, l]))
            if strict:
                return StructureReport(prop, k, False, 0, route, "decided", [undecided], fallbacks)
    if undecided is not None:
        return StructureReport(prop, k, None, 0, route, "inconclusive", [undecided], fallbacks)
    return StructureReport(prop, k, True, 1, route, "decided", [], fallbacks)


# ---------------------------------------------------------------------------
# Peña parametrization


def pena_transform(X) -> np.ndarray:
    """Lower block ``C`` of ``X @ inv(X[:m]) @ K_m = [K_m; C]`` for tall ``X``.

    Every minor of ``C`` matches one ``m``-minor of `X` other than the leading
    one: ``det(X[g]) = det(X[:m]) * det(C[I, J])``, see
    :func:`pena_minor_pairs`.  Hence `X` is (strictly) ``m``-sign consistent
    iff ``C`` is (strictly) totally positive.
    """
    X = check_matrix(X)
    n, m = X.shape
    if n < m:
        raise ValueError(f"expected a tall matrix (n >= m), got shape {X.shape}")
    top = X[:m]
    if abs(np.linalg.det(top)) <= SIGN_TOL * float(hadamard_bound(top)):
        raise SingularBlockError("leading m x m block is singular")
    return (X @ np.linalg.solve(top, antidiag_K(m)))[m:]


def pena_minor_pairs(
    n: int, m: int
) -> Iterator[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]]:
    """Yield ``(gamma, I, J)`` pairing ``det(X[gamma])`` with ``det(C[I, J])``.

    ``gamma`` runs over all 1-based ``m``-tuples of ``(1:n)`` except ``(1:m)``;
    ``I`` indexes rows of ``C`` and ``J`` columns.  Rows of ``K_m`` kept in
    ``gamma`` remove column ``m + 1 - i`` from ``J``.
    """
    for gamma in itertools.combinations(range(1, n + 1), m):
        if gamma == tuple(range(1, m + 1)):
            continue
        kept = [i for i in gamma if i <= m]
        I = tuple(i - m for i in gamma if i > m)
        removed = {m + 1 - i for i in kept}
        J = tuple(c for c in range(1, m + 1) if c not in removed)
        yield gamma, I, J


def verify_pena_strict(X, tol: float = SIGN_TOL) -> StructureReport:
    """Strict ``m``-sign consistency of a tall ``n x m`` matrix via its Peña transform.

    ``X`` is strictly ``m``-sign consistent iff ``C = pena_transform(X)`` is
    strictly totally positive, which the consecutive minors of ``C`` decide.
    Each minor of ``C`` stands for ``det(X[gamma]) / det(X[:m])``, so the
    dead zone is taken on that ``m``-minor of ``X`` (its Hadamard bound)
    rather than on the window of ``C``; otherwise geometrically decaying
    rows push every high-order minor of ``C`` into the dead zone.

    A negative minor refutes; a minor inside the dead zone leaves the verdict
    open (``holds=None``).
    """
    X = check_matrix(X)
    n, m = X.shape
    C = pena_transform(X)
    top_det = float(np.linalg.det(X[:m]))
    shared = 1 if top_det > 0 else -1
    if n == m:
        return StructureReport("SSC", m, True, shared, "pena", "decided")
    with np.errstate(divide="ignore"):
        logn = np.log(np.linalg.norm(X, axis=1))
    # column c of C pairs with row m + 1 - c of the leading block
    top_rev = logn[:m][::-1]
    tail = logn[m:]
    log_top = float(np.sum(logn[:m])) - np.log(abs(top_det))
    fallbacks = 0
    undecided = None
    for j in range(1, min(n - m, m) + 1):
        ms = consecutive_minors(C, j)
        fallbacks += ms.fallbacks
        row_sum = sliding_window_view(tail, j).sum(axis=-1)
        col_sum = sliding_window_view(top_rev, j).sum(axis=-1)
        with np.errstate(over="ignore", invalid="ignore"):
            bounds = np.exp(log_top + row_sum[:, None] - col_sum[None, :])
        sg = deadzone_sign(ms.values, bounds, tol)
        neg = np.argwhere(sg < 0)
        if neg.size:
            w = _pena_witness(ms, neg[0], m, top_det)
            return StructureReport("SSC", m, False, 0, "pena", "decided", [w], fallbacks)
        zero = np.argwhere(sg == 0)
        if zero.size and undecided is None:
            undecided = _pena_witness(ms, zero[0], m, top_det)
    if undecided is not None:
        return StructureReport("SSC", m, None, 0, "pena", "inconclusive", [undecided], fallbacks)
    return StructureReport("SSC", m, True, shared, "pena", "decided", [], fallbacks)


def _pena_witness(ms, pos, m: int, top_det: float) -> Witness:
    # report the m-minor of X that the C-minor stands for
    i, l = (int(v) for v in pos)
    I, J = ms.window(i, l)
    kept = [m + 1 - c for c in range(1, m + 1) if c not in J]
    gamma = tuple(sorted(kept + [m + r for r in I]))
    return Witness(gamma, tuple(range(1, m + 1)), top_det * float(ms.values[i, l]))


# ---------------------------------------------------------------------------
# variation bounding


def _columns_independent(X: np.ndarray, q: int, max_subsets: int) -> bool | None:
    m = X.shape[1]
    if comb(m, q) > max_subsets:
        return None
    for cols in itertools.combinations(range(m), q):
        if rank_estimate(X[:, list(cols)]) < q:
            return False
    return True


def verify_variation_bounding(X, k: int, max_subsets: int = 10**5) -> StructureReport:
    """Decide ``X in VB_k`` through its equivalence with ``SC_{k+1}``.

    The equivalence needs either ``k+1 < rank(X)`` with every ``k+1`` columns
    independent, or ``k+1 = m = rank(X) < n``.  Two trivially true cases are
    handled directly: ``k = 0`` for a one-signed matrix, and ``n <= k+1``
    where no output can exceed ``k`` sign changes.  Otherwise the report is
    ``undecidable`` rather than a guess.
    """
    X = check_matrix(X)
    n, m = X.shape
    k = int(k)
    if not 0 <= k <= min(n, m) - 1:
        raise ValueError(f"k={k} out of range 0..{min(n, m) - 1}")
    if n <= k + 1:
        return StructureReport("VB", k, True, 0, "trivial_length", "decided")
    if k == 0:
        sc1 = verify_sign_consistent(X, 1)
        if sc1.holds:
            return StructureReport("VB", 0, True, sc1.shared_sign, "one_signed", "decided")
    rank = rank_estimate(X)
    hyp = None
    if k + 1 < rank:
        hyp = _columns_independent(X, k + 1, max_subsets)
    elif k + 1 == m == rank and n > m:
        hyp = True
    if not hyp:
        return StructureReport(
            "VB", k, None, 0, "sign_consistency_equivalence", "undecidable",
            details={"rank": rank, "reason": "hypothesis of the SC equivalence not met"},
        )
    sc = verify_sign_consistent(X, k + 1)
    return StructureReport(
        "VB", k, sc.holds, sc.shared_sign, "sign_consistency_equivalence", sc.status,
        list(sc.witnesses), sc.fallbacks, {"sc_route": sc.route, "rank": rank},
    )


# ---------------------------------------------------------------------------
# sequences


def is_log_concave(a) -> SequenceReport:
    """``a[k+1]**2 >= a[k] * a[k+2] - 1e-12 * max(a)**2`` for every ``k``.

    ``violation_index`` is the 1-based ``k`` of the first failing triple.
    """
    a = check_vector(a, "a")
    if np.any(a < 0):
        raise ValueError("log-concavity is defined for nonnegative sequences")
    if a.size < 3:
        return SequenceReport("log_concave", True)
    tol = 1e-12 * float(np.max(a)) ** 2
    slack = a[1:-1] ** 2 - a[:-2] * a[2:] + tol
    bad = np.flatnonzero(slack < 0)
    if bad.size:
        return SequenceReport("log_concave", False, violation_index=int(bad[0]) + 1)
    return SequenceReport("log_concave", True)


def is_unimodal(a, rtol: float = 1e-12) -> SequenceReport:
    """Single-peak test: the forward difference changes sign at most once, + to -.

    Differences below ``rtol * max|a|`` count as flat.  ``peak_index`` is the
    smallest 1-based index attaining the maximum; ``violation_index`` is the
    1-based start of the first rise that follows a fall.
    """
    a = check_vector(a, "a")
    if a.size == 0:
        raise ValueError("empty sequence")
    d = np.diff(a)
    tol = rtol * float(np.max(np.abs(a)))
    sg = np.where(np.abs(d) <= tol, 0, np.sign(d))
    falling = np.flatnonzero(sg < 0)
    if falling.size:
        rises_after = np.flatnonzero(sg[falling[0]:] > 0)
        if rises_after.size:
            return SequenceReport("unimodal", False, violation_index=int(falling[0] + rises_after[0]) + 1)
    return SequenceReport("unimodal", True, peak_index=int(np.argmax(a)) + 1)
