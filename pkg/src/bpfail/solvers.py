"""Reference solvers: revised simplex for basis pursuit and an exhaustive l0 oracle.

Both are meant for desk-scale instances.  The simplex uses Bland's rule and
no randomization, so identical inputs produce identical pivot sequences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from ._validation import check_matrix, check_vector
from .exceptions import NumericFailure

__all__ = [
    "L0Report",
    "LPResult",
    "FeasibilityResult",
    "RevisedSimplex",
    "SparseSolution",
    "lp_feasibility",
    "solve_bp",
    "solve_l0",
    "support_of",
]

DUALITY_RTOL = 1e-7


def support_of(u: np.ndarray, threshold: float) -> list[int]:
    """1-based indices with ``|u_i| > threshold * ||u||_inf``."""
    u = np.asarray(u, dtype=float)
    umax = float(np.max(np.abs(u))) if u.size else 0.0
    if umax == 0.0:
        return []
    return [int(i) + 1 for i in np.flatnonzero(np.abs(u) > threshold * umax)]


# ---------------------------------------------------------------------------
# revised simplex


@dataclass
class LPResult:
    """Outcome of ``min c^T x  s.t.  A x = b, x >= 0``.

    ``duals`` solves ``B^T y = c_B`` for the final basis and has one entry per
    row of the original ``A`` (zero on rows found to be redundant).
    """

    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    duals: np.ndarray | None = None
    basis: np.ndarray | None = None
    iterations: int = 0
    pivots: list[tuple[int, int]] = field(default_factory=list)


class RevisedSimplex:
    """Two-phase revised simplex with Bland's anti-cycling rule.

    The basis is refactorized by LU at every iteration, which is wasteful but
    keeps each step independent of accumulated update error.

    Parameters
    ----------
    tol : float
        Optimality tolerance on reduced costs, relative to ``max |c|``.
    pivot_tol : float
        Smallest admissible pivot element in the ratio test.
    feas_tol : float
        Phase-1 objective (relative to ``||b||_1``) above which the problem
        is declared infeasible.
    max_iter : int, optional
        Iteration cap per phase; defaults to ``50 * (rows + cols)``.
    """

    def __init__(self, tol: float = 1e-10, pivot_tol: float = 1e-11,
                 feas_tol: float = 1e-9, max_iter: int | None = None):
        self.tol = tol
        self.pivot_tol = pivot_tol
        self.feas_tol = feas_tol
        self.max_iter = max_iter

    def _factor(self, B: np.ndarray):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error", LinAlgWarning)
            try:
                lu = lu_factor(B, check_finite=False)
            except (LinAlgWarning, ValueError) as exc:
                raise NumericFailure("singular basis") from exc
        if np.min(np.abs(np.diag(lu[0]))) <= 1e-14 * max(1.0, np.abs(B).max()):
            raise NumericFailure("singular basis")
        return lu

    def _iterate(self, A, b, c, basis, allowed, trace):
        m, n = A.shape
        cap = self.max_iter or 50 * (m + n)
        ctol = self.tol * max(1.0, float(np.abs(c).max()))
        for it in range(cap):
            lu = self._factor(A[:, basis])
            xB = lu_solve(lu, b)
            y = lu_solve(lu, c[basis], trans=1)
            d = c - A.T @ y
            d[basis] = 0.0
            cand = np.flatnonzero((d < -ctol) & allowed)
            if cand.size == 0:
                return "optimal", basis, xB, y, it
            q = int(cand[0])
            w = lu_solve(lu, A[:, q])
            ok = w > self.pivot_tol
            if not np.any(ok):
                return "unbounded", basis, xB, y, it
            ratios = np.full(m, np.inf)
            ratios[ok] = np.maximum(xB[ok], 0.0) / w[ok]
            theta = ratios.min()
            ties = np.flatnonzero(ratios <= theta + 1e-12 * (1.0 + theta))
            leave = int(ties[np.argmin(basis[ties])])
            trace.append((q, int(basis[leave])))
            basis = basis.copy()
            basis[leave] = q
        raise NumericFailure(f"iteration cap {cap} reached")

    def solve(self, A, b, c) -> LPResult:
        A = check_matrix(A, "A")
        m, n = A.shape
        b = check_vector(b, "b", m).copy()
        c = check_vector(c, "c", n)
        A = A.copy()
        flip = b < 0
        A[flip] *= -1.0
        b[flip] *= -1.0
        trace: list[tuple[int, int]] = []
        try:
            # phase 1 on [A, I]
            A1 = np.hstack([A, np.eye(m)])
            c1 = np.concatenate([np.zeros(n), np.ones(m)])
            basis = np.arange(n, n + m)
            allowed = np.ones(n + m, dtype=bool)
            _, basis, xB, _, it1 = self._iterate(A1, b, c1, basis, allowed, trace)
            infeas = float(np.sum(xB[basis >= n]))
            if infeas > self.feas_tol * max(1.0, float(np.abs(b).sum())):
                return LPResult("infeasible", iterations=it1, pivots=trace)

            rows = np.arange(m)
            basis, rows = self._purge_artificials(A1, basis, rows, n)
            A2, b2 = A[rows], b[rows]
            status, basis, xB, y, it2 = self._iterate(
                A2, b2, c, basis, np.ones(n, dtype=bool), trace
            )
        except NumericFailure:
            return LPResult("numeric_failure", pivots=trace)
        if status == "unbounded":
            return LPResult("unbounded", iterations=it1 + it2, pivots=trace)
        x = np.zeros(n)
        x[basis] = np.maximum(xB, 0.0)
        duals = np.zeros(m)
        duals[rows] = y
        duals[flip] *= -1.0
        return LPResult("optimal", x, float(c @ x), duals, basis, it1 + it2, trace)

    def _purge_artificials(self, A1, basis, rows, n):
        """Pivot zero-level artificials out of the basis, dropping redundant rows."""
        basis = basis.copy()
        while True:
            sub = A1[np.ix_(rows, np.arange(A1.shape[1]))]
            art = [i for i, j in enumerate(basis) if j >= n]
            if not art:
                return basis, rows
            pos = art[0]
            lu = self._factor(sub[:, basis])
            e = np.zeros(rows.size)
            e[pos] = 1.0
            w = lu_solve(lu, e, trans=1)
            alpha = w @ sub[:, :n]
            alpha[basis[basis < n]] = 0.0
            scale = max(1.0, float(np.abs(alpha).max()))
            cand = np.flatnonzero(np.abs(alpha) > 1e-9 * scale)
            if cand.size and np.abs(alpha).max() > 1e-9:
                basis[pos] = int(cand[0])
                continue
            # row combination w is zero on every original column: redundant
            row_local = int(basis[pos] - n)
            keep = rows != row_local
            basis = np.delete(basis, pos)
            rows = rows[keep]
            # artificial columns stay indexed by original row number
            if rows.size == 0:
                return basis, rows


# ---------------------------------------------------------------------------
# basis pursuit


@dataclass
class SparseSolution:
    """A candidate solution of ``V u = y``.

    ``support`` holds 1-based indices with ``|u_i| > threshold * ||u||_inf``.
    For basis pursuit, ``beta`` is the dual certificate and
    ``dual_objective = y^T beta``.
    """

    u: np.ndarray
    support: list[int]
    objective: float
    status: str
    solver: str
    threshold: float = 1e-6
    residual: float = 0.0
    beta: np.ndarray | None = None
    dual_objective: float | None = None
    iterations: int = 0
    pivots: list[tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "u": [float(v) for v in self.u],
            "support": list(self.support),
            "objective": self.objective,
            "status": self.status,
            "solver": self.solver,
            "threshold": self.threshold,
            "residual": self.residual,
            "beta": None if self.beta is None else [float(v) for v in self.beta],
            "dual_objective": self.dual_objective,
            "iterations": self.iterations,
        }

    def to_text(self) -> str:
        return "".join(f"{i} {v:.17g}\n" for i, v in enumerate(self.u, start=1))


def _row_scaling(V: np.ndarray) -> np.ndarray:
    mx = np.abs(V).max(axis=1)
    return np.where(mx > 0, 1.0 / np.where(mx > 0, mx, 1.0), 1.0)


def solve_bp(V, y, feas_tol: float = 1e-8, threshold: float = 1e-6,
             solver: RevisedSimplex | None = None) -> SparseSolution:
    """Basis pursuit ``min ||u||_1 s.t. V u = y`` by the simplex method.

    The problem is posed in standard form over ``u = u+ - u-`` after scaling
    each row of ``V`` to unit max-norm and ``y`` to unit max-norm.  The dual
    ``max y^T beta s.t. ||V^T beta||_inf <= 1`` is read off the final basis
    and strong duality is checked to ``1e-7`` relative; a larger gap is
    reported as ``numeric_failure``.
    """
    V = check_matrix(V, "V")
    m, n = V.shape
    y = check_vector(y, "y", m)
    solver = solver or RevisedSimplex()
    if not np.any(y):
        return SparseSolution(np.zeros(n), [], 0.0, "optimal", "bp_lp", threshold,
                              beta=np.zeros(m), dual_objective=0.0)
    D = _row_scaling(V)
    sigma = float(np.abs(D * y).max())
    VD = V * D[:, None]
    res = solver.solve(np.hstack([VD, -VD]), D * y / sigma, np.ones(2 * n))
    if res.status != "optimal":
        return SparseSolution(np.zeros(n), [], float("nan"), res.status, "bp_lp",
                              threshold, iterations=res.iterations, pivots=res.pivots)
    u = sigma * (res.x[:n] - res.x[n:])
    beta = D * res.duals
    obj = float(np.abs(u).sum())
    dual_obj = float(y @ beta)
    residual = float(np.linalg.norm(V @ u - y))
    status = "optimal"
    gap_ok = abs(obj - dual_obj) <= DUALITY_RTOL * max(obj, np.finfo(float).tiny)
    dual_feas = float(np.abs(V.T @ beta).max()) <= 1.0 + DUALITY_RTOL
    if not (gap_ok and dual_feas) or residual > feas_tol * max(1.0, float(np.linalg.norm(y))):
        status = "numeric_failure"
    return SparseSolution(u, support_of(u, threshold), obj, status, "bp_lp", threshold,
                          residual, beta, dual_obj, res.iterations, res.pivots)


# ---------------------------------------------------------------------------
# dual feasibility


@dataclass
class FeasibilityResult:
    feasible: bool | None
    status: str
    beta: np.ndarray | None = None


def lp_feasibility(V, fixed: dict[int, int], solver: RevisedSimplex | None = None) -> FeasibilityResult:
    """Decide whether ``beta`` exists with ``V[:, i]^T beta = fixed[i]`` on the
    fixed (1-based) indices and ``|V[:, j]^T beta| <= 1`` elsewhere.

    Phase 1 of the simplex method on ``beta = b+ - b-`` with two slacks per
    free column.  ``status`` is ``feasible``, ``infeasible`` or
    ``numeric_failure``.
    """
    V = check_matrix(V, "V")
    m, n = V.shape
    solver = solver or RevisedSimplex()
    fixed = {int(k): float(v) for k, v in fixed.items()}
    for k in fixed:
        if not 1 <= k <= n:
            raise IndexError(f"fixed index {k} out of bounds (1..{n})")
    if not fixed:
        return FeasibilityResult(True, "feasible", np.zeros(m))
    fix = sorted(fixed)
    free = [j for j in range(1, n + 1) if j not in fixed]
    F = V[:, [k - 1 for k in fix]].T
    G = V[:, [j - 1 for j in free]].T
    nf = len(free)
    # [F -F 0 0; G -G I 0; -G G 0 I] [b+; b-; s1; s2] = [s; 1; 1]
    A = np.block([
        [F, -F, np.zeros((len(fix), 2 * nf))],
        [G, -G, np.eye(nf), np.zeros((nf, nf))],
        [-G, G, np.zeros((nf, nf)), np.eye(nf)],
    ])
    rhs = np.concatenate([[fixed[k] for k in fix], np.ones(2 * nf)])
    res = solver.solve(A, rhs, np.zeros(A.shape[1]))
    if res.status == "infeasible":
        return FeasibilityResult(False, "infeasible")
    if res.status != "optimal":
        return FeasibilityResult(None, "numeric_failure")
    beta = res.x[:m] - res.x[m:2 * m]
    # guard against a phase-1 answer that does not actually satisfy the system
    err = max(
        float(np.abs(F @ beta - rhs[: len(fix)]).max()),
        float(np.abs(G @ beta).max()) - 1.0 if nf else 0.0,
    )
    if err > 1e-7:
        return FeasibilityResult(None, "numeric_failure", beta)
    return FeasibilityResult(True, "feasible", beta)


# ---------------------------------------------------------------------------
# l0 oracle


@dataclass
class L0Report:
    """Result of the exhaustive sparsest-solution search.

    ``min_cardinality`` is None when no support up to ``search_bound``
    reproduces ``y``.  ``solutions_found`` lists every solution of minimal
    cardinality, so more than one entry witnesses non-uniqueness.
    """

    min_cardinality: int | None
    solutions_found: list[SparseSolution]
    exhaustive: bool
    search_bound: int
    supports_tested: int = 0

    @property
    def status(self) -> str:
        return "optimal" if self.solutions_found else "infeasible"

    @property
    def count(self) -> int:
        return len(self.solutions_found)

    def to_dict(self) -> dict:
        return {
            "min_cardinality": self.min_cardinality,
            "count": self.count,
            "exhaustive": self.exhaustive,
            "search_bound": self.search_bound,
            "supports_tested": self.supports_tested,
            "status": self.status,
            "solutions": [s.to_dict() for s in self.solutions_found],
        }


def _fit_supports(V, y, supports, res_tol, threshold):
    """Least squares on a batch of supports; returns accepted (support, coef, res)."""
    Vs = V[:, supports]  # (m, K, s)
    Vs = np.moveaxis(Vs, 1, 0)  # (K, m, s)
    coef = np.linalg.pinv(Vs, rcond=1e-13) @ y
    res = np.linalg.norm(np.einsum("kms,ks->km", Vs, coef) - y, axis=1)
    ynorm = float(np.linalg.norm(y))
    cmax = np.abs(coef).max(axis=1)
    ok = (res <= res_tol * ynorm) & np.all(np.abs(coef) > threshold * cmax[:, None], axis=1)
    return [(supports[i], coef[i], float(res[i])) for i in np.flatnonzero(ok)]


def solve_l0(V, y, max_card: int | None = None, res_tol: float = 1e-8,
             threshold: float = 1e-6, budget: int = 10**7,
             chunk: int = 4096) -> L0Report:
    """Sparsest solutions of ``V u = y`` by enumerating supports.

    Supports are visited by increasing size in lexicographic order.  A
    support is accepted when its least-squares residual is at most
    ``res_tol * ||y||_2`` and no fitted entry falls below ``threshold`` times
    the largest.  At the first size with an accepted support the whole size is
    finished so all minimal solutions are counted.
    """
    V = check_matrix(V, "V")
    m, n = V.shape
    y = check_vector(y, "y", m)
    max_card = min(m, n) if max_card is None else int(max_card)
    if not np.any(y):
        zero = SparseSolution(np.zeros(n), [], 0.0, "optimal", "l0_oracle", threshold)
        return L0Report(0, [zero], True, max_card, 1)
    tested = 0
    for s in range(1, max_card + 1):
        if tested + comb(n, s) > budget:
            return L0Report(None, [], False, max_card, tested)
        found = []
        it = itertools.combinations(range(n), s)
        while True:
            batch = list(itertools.islice(it, chunk))
            if not batch:
                break
            tested += len(batch)
            found.extend(_fit_supports(V, y, np.array(batch), res_tol, threshold))
        if found:
            sols = []
            for sup, coef, res in found:
                u = np.zeros(n)
                u[sup] = coef
                sols.append(SparseSolution(u, [int(i) + 1 for i in sup], float(np.abs(coef).sum()),
                                           "optimal", "l0_oracle", threshold, res))
            return L0Report(s, sols, True, max_card, tested)
    return L0Report(None, [], True, max_card, tested)
