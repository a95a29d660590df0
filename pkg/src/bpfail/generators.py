"""Structured matrix families and fuel-optimal control instances."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import hankel as _scipy_hankel

from ._validation import check_matrix, check_vector
from .linalg import SIGN_TOL, consecutive_minors, forward_difference
from .structure import StructureReport, Witness

__all__ = [
    "FuelInstance",
    "FunctionFamily",
    "LtiSystem",
    "bernstein_sample",
    "check_family_conditions",
    "companion_system",
    "confluent_matrix",
    "ctrb",
    "fuel_instance",
    "hankel",
    "impulse_response",
    "obsv",
    "page_matrix",
    "simulate",
]


@dataclass
class LtiSystem:
    """Discrete-time single-input system ``x(t+1) = A x(t) + b u(t)``, output ``c x``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray | None = None

    def __post_init__(self):
        self.A = check_matrix(self.A, "A")
        m = self.A.shape[0]
        if self.A.shape != (m, m):
            raise ValueError(f"A must be square, got {self.A.shape}")
        self.b = check_vector(self.b, "b", m)
        if self.c is not None:
            self.c = check_vector(self.c, "c", m)

    @property
    def order(self) -> int:
        return self.A.shape[0]

    @classmethod
    def diagonal(cls, x: Sequence[float], b=None, c=None) -> "LtiSystem":
        x = check_vector(x, "x")
        return cls(np.diag(x), np.ones(x.size) if b is None else b, c)

    def to_dict(self) -> dict:
        out = {"A": self.A.tolist(), "b": self.b.tolist()}
        if self.c is not None:
            out["c"] = self.c.tolist()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "LtiSystem":
        return cls(np.asarray(d["A"], float), np.asarray(d["b"], float),
                   None if d.get("c") is None else np.asarray(d["c"], float))


def companion_system(den: Sequence[float]) -> LtiSystem:
    """Controllable canonical realization of ``G(z) = 1 / den(z)``.

    `den` lists monic denominator coefficients in descending powers.
    """
    den = check_vector(den, "den")
    if den.size < 2 or den[0] == 0:
        raise ValueError("denominator must have degree >= 1 and a nonzero leading coefficient")
    den = den / den[0]
    m = den.size - 1
    A = np.eye(m, k=1)
    A[-1] = -den[:0:-1]
    b = np.zeros(m)
    b[-1] = 1.0
    c = np.zeros(m)
    c[0] = 1.0
    return LtiSystem(A, b, c)


def ctrb(sys: LtiSystem, N: int) -> np.ndarray:
    """Extended controllability matrix ``[b, Ab, ..., A^{N-1} b]``."""
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    out = np.empty((sys.order, N))
    out[:, 0] = sys.b
    for k in range(1, N):
        out[:, k] = sys.A @ out[:, k - 1]
    return out


def obsv(sys: LtiSystem, M: int) -> np.ndarray:
    """Extended observability matrix with rows ``c, cA, ..., cA^{M-1}``."""
    if sys.c is None:
        raise ValueError("system has no output vector c")
    return ctrb(LtiSystem(sys.A.T, sys.c), M).T


def impulse_response(sys: LtiSystem, T: int) -> np.ndarray:
    """Markov parameters ``g(t) = c A^{t-1} b`` for ``t = 1..T``."""
    if sys.c is None:
        raise ValueError("system has no output vector c")
    return sys.c @ ctrb(sys, T)


def hankel(sys: LtiSystem, M: int, N: int) -> np.ndarray:
    """``M x N`` Hankel matrix with entry ``(i, j) = g(i + j - 1)``."""
    M, N = int(M), int(N)
    if M < 1 or N < 1:
        raise ValueError("M and N must be >= 1")
    g = impulse_response(sys, M + N - 1)
    return _scipy_hankel(g[:M], g[M - 1:])


def page_matrix(g, M: int) -> np.ndarray:
    """Stack disjoint length-`M` blocks of `g` as columns."""
    g = check_vector(g, "g")
    M = int(M)
    if M < 1:
        raise ValueError("M must be >= 1")
    cols = g.size // M
    if cols < 1:
        raise ValueError(f"need at least {M} samples, got {g.size}")
    return g[: M * cols].reshape(cols, M).T.copy()


def bernstein_sample(degree: int, points) -> np.ndarray:
    """Bernstein basis of `degree` sampled at `points` (one row per point)."""
    d = int(degree)
    if d < 0:
        raise ValueError("degree must be >= 0")
    t = check_vector(points, "points")
    if np.any((t < 0) | (t > 1)):
        raise ValueError("points must lie in [0, 1]")
    j = np.arange(d + 1)
    binom = np.array([comb(d, int(i)) for i in j], dtype=float)
    return binom * t[:, None] ** j * (1.0 - t[:, None]) ** (d - j)


# ---------------------------------------------------------------------------
# function families


@dataclass
class FunctionFamily:
    """Functions ``f_1..f_n`` with derivatives up to ``max_order``.

    ``evaluate(k, t)`` returns the vector ``(f_j^{(k)}(t))_j``.  Use the
    class constructors rather than building one by hand.
    """

    name: str
    size: int
    evaluate: Callable[[int, float], np.ndarray]
    max_order: int | None = None
    params: dict = field(default_factory=dict)

    def derivative(self, k: int, t: float) -> np.ndarray:
        if k < 0 or (self.max_order is not None and k > self.max_order):
            raise ValueError(f"derivative order {k} unsupported by family {self.name!r}")
        return np.asarray(self.evaluate(int(k), float(t)), dtype=float)

    def values(self, t: float) -> np.ndarray:
        return self.derivative(0, t)

    @classmethod
    def _polynomial(cls, name: str, polys, params) -> "FunctionFamily":
        cache: dict[int, list] = {0: list(polys)}

        def evaluate(k, t):
            if k not in cache:
                cache[k] = [p.deriv(k) for p in cache[0]]
            return np.array([p(t) for p in cache[k]])

        return cls(name, len(polys), evaluate, None, params)

    @classmethod
    def monomial(cls, n: int) -> "FunctionFamily":
        """``f_j(t) = t^{j-1}`` for ``j = 1..n``."""
        P = np.polynomial.Polynomial
        return cls._polynomial("monomial", [P.basis(j) for j in range(n)], {"n": n})

    @classmethod
    def bernstein(cls, degree: int) -> "FunctionFamily":
        P = np.polynomial.Polynomial
        t, s = P([0, 1]), P([1, -1])
        polys = [comb(degree, j) * t**j * s ** (degree - j) for j in range(degree + 1)]
        return cls._polynomial("bernstein", polys, {"degree": degree})

    @classmethod
    def exponential(cls, rates: Sequence[float]) -> "FunctionFamily":
        """``f_j(t) = exp(rates_j t)``."""
        lam = check_vector(rates, "rates")
        return cls("exponential", lam.size, lambda k, t: lam**k * np.exp(lam * t), None,
                   {"rates": lam.tolist()})

    @classmethod
    def custom(cls, name: str, size: int, evaluate: Callable[[int, float], np.ndarray],
               max_order: int) -> "FunctionFamily":
        return cls(name, size, evaluate, max_order)

    def differenced(self) -> "FunctionFamily":
        """Family of successive differences ``f_{j+1} - f_j``."""
        return FunctionFamily(
            f"delta_{self.name}", self.size - 1,
            lambda k, t: np.diff(self.derivative(k, t)), self.max_order, dict(self.params),
        )


def confluent_matrix(family: FunctionFamily, t: float, m: int) -> np.ndarray:
    """``n x m`` matrix with entry ``(j, k) = f_j^{(k-1)}(t)``."""
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    return np.column_stack([family.derivative(k, t) for k in range(m)])


def _grid_signs(family: FunctionFamily, m: int, grid: np.ndarray) -> dict:
    """Sign bookkeeping per minor order over the grid (necessary conditions only)."""
    orders = {k: {"signs": set(), "first": {}} for k in range(1, m + 1)}
    for t in grid:
        X = confluent_matrix(family, t, m)
        for k in range(1, m + 1):
            if k > X.shape[0]:
                continue
            seq = consecutive_minors(X[:, :k], k)
            sg = seq.signs(SIGN_TOL).ravel()
            vals = seq.flat()
            for s in (-1, 0, 1):
                hit = np.flatnonzero(sg == s)
                if hit.size:
                    orders[k]["signs"].add(s)
                    orders[k]["first"].setdefault(s, (float(t), int(hit[0]) + 1, float(vals[hit[0]])))
    return orders


def _grid_report(family: FunctionFamily, m: int, grid: np.ndarray) -> StructureReport:
    orders = _grid_signs(family, m, grid)
    holds = True
    witnesses = []
    per_order = {}
    for k, info in orders.items():
        signs = info["signs"]
        ok = bool(signs) and 0 not in signs and len(signs) == 1
        per_order[str(k)] = {"signs": sorted(signs), "holds": ok}
        if not ok:
            holds = False
            for s in sorted(info["first"]):
                t, start, val = info["first"][s]
                witnesses.append(Witness(tuple(range(start, start + k)), tuple(range(1, k + 1)), val))
                per_order[str(k)].setdefault("witness_t", []).append(t)
    mixed = [k for k, v in per_order.items() if not v["holds"]]
    return StructureReport(
        "family_conditions", m, holds, 0, "grid", "necessary_grid_check", witnesses,
        details={"family": family.name, "orders": per_order, "mixed_orders": mixed,
                 "grid_size": int(grid.size)},
    )


def check_family_conditions(family: FunctionFamily, m: int, grid, variant: str = "plain") -> StructureReport:
    """Grid check of the sign conditions on confluent minors.

    At every grid point the consecutive-row ``k``-minors of the first ``k``
    derivative columns (``k < m``) and the consecutive ``m``-minors must each
    keep one strict sign across the grid.  ``variant`` selects the family
    itself (``"plain"``), its successive differences (``"delta"``) or both.
    Passing is necessary for the continuum property, not a proof of it.
    """
    grid = check_vector(grid, "grid")
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    if variant not in ("plain", "delta", "both"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "plain":
        return _grid_report(family, m, grid)
    if variant == "delta":
        return _grid_report(family.differenced(), m, grid)
    plain = _grid_report(family, m, grid)
    delta = _grid_report(family.differenced(), m, grid)
    return StructureReport(
        "family_conditions", m, bool(plain.holds and delta.holds), 0, "grid",
        "necessary_grid_check", plain.witnesses + delta.witnesses,
        details={"plain": plain.to_dict(), "delta": delta.to_dict()},
    )


# ---------------------------------------------------------------------------
# fuel-optimal control


@dataclass
class FuelInstance:
    """Steer ``x(0) = xi`` to ``x(N) = 0``; recovery problem ``V u = y``.

    Column ``i`` of ``V`` multiplies the input at time ``N - i``, so the input
    at time 0 sits in the last column.
    """

    system: LtiSystem
    N: int
    xi: np.ndarray
    V: np.ndarray
    y: np.ndarray
    u_true: dict[int, float]

    def column_of_time(self, t: int) -> int:
        return self.N - int(t)

    def time_of_column(self, i: int) -> int:
        return self.N - int(i)

    @property
    def time_table(self) -> dict[int, int]:
        return {i: self.N - i for i in range(1, self.N + 1)}

    def stacked(self) -> np.ndarray:
        """The input sequence placed at column positions."""
        u = np.zeros(self.N)
        for t, v in self.u_true.items():
            u[self.column_of_time(t) - 1] = v
        return u

    def to_dict(self) -> dict:
        return {
            **self.system.to_dict(),
            "N": self.N,
            "xi": self.xi.tolist(),
            "u_true": {str(t): v for t, v in sorted(self.u_true.items())},
            "time_of_column": {str(i): t for i, t in self.time_table.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FuelInstance":
        sys = LtiSystem.from_dict(d)
        u_true = {int(t): float(v) for t, v in d.get("u_true", {}).items()}
        inst = fuel_instance(sys, int(d["N"]), u_true)
        if "xi" in d and not u_true:
            xi = check_vector(d["xi"], "xi", sys.order)
            inst.xi = xi
            inst.y = -np.linalg.matrix_power(sys.A, inst.N) @ xi
        return inst


def fuel_instance(sys: LtiSystem, N: int, u_true: dict[int, float] | None = None) -> FuelInstance:
    """Build the recovery problem whose sparse input is `u_true` (time -> value).

    ``xi = -sum_t A^{-1-t} b u(t)`` is the initial state from which `u_true`
    reaches the origin at time `N`.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    u_true = {int(t): float(v) for t, v in (u_true or {}).items()}
    for t in u_true:
        if not 0 <= t < N:
            raise ValueError(f"time {t} outside 0..{N - 1}")
    m = sys.order
    xi = np.zeros(m)
    if u_true:
        try:
            vecs = {}
            w = sys.b.copy()
            for t in range(max(u_true) + 1):
                w = np.linalg.solve(sys.A, w)  # A^{-1-t} b
                vecs[t] = w
        except np.linalg.LinAlgError as exc:
            raise ValueError("A is singular; cannot back-solve the initial state") from exc
        for t, v in u_true.items():
            xi -= v * vecs[t]
    V = ctrb(sys, N)
    y = -np.linalg.matrix_power(sys.A, N) @ xi
    return FuelInstance(sys, N, xi, V, y, u_true)


def simulate(sys: LtiSystem, xi, u) -> np.ndarray:
    """States ``x(0..len(u))`` under the input sequence `u` (indexed by time)."""
    xi = check_vector(xi, "xi", sys.order)
    u = check_vector(u, "u")
    out = np.empty((u.size + 1, sys.order))
    out[0] = xi
    for t, ut in enumerate(u):
        out[t + 1] = sys.A @ out[t] + sys.b * ut
    return out


def delta_of_transpose(V) -> np.ndarray:
    """``Delta(V^T)``: successive row differences of the transpose."""
    return forward_difference(check_matrix(V, "V").T)
