"""Failure, unimodality and uniqueness certificates for basis pursuit.

The central object is the p-vector: ``p_k = || pinv(V[:, :r]) V[:, k] ||_1``.
Whenever ``p_k < 1`` for some ``k > r``, no solution of ``min ||u||_0 s.t.
Vu = y`` with ``u_k != 0`` can also be a basis pursuit minimizer.  The
routines here compute that set exactly (full scan), through the companion
polynomial of the controllable dynamics, or by bisection once the p-vector is
certified unimodal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from ._validation import check_matrix, check_vector
from .exceptions import CompoundTooLargeError, ImageConditionError, SingularBlockError
from .linalg import (
    SIGN_TOL,
    LeadingBlock,
    antidiag_K,
    forward_difference,
    hadamard_bound,
    rank_estimate,
)
from .structure import (
    StructureReport,
    verify_pena_strict,
    verify_sign_consistent,
    verify_variation_bounding,
)

__all__ = [
    "P_TOL",
    "DualCertificateVerdict",
    "FailureCertificate",
    "GSequences",
    "PVector",
    "UniquenessCertificate",
    "UnimodalityCertificate",
    "certify_drastic_failure",
    "certify_unimodality",
    "column_coherence",
    "critical_index",
    "dual_certificate_check",
    "failure_indices",
    "g_sequences",
    "p_vector",
    "sign_transform",
    "uniqueness_check",
]

#: ``p_k`` certifies failure only when ``1 - p_k > P_TOL``.
P_TOL = 1e-9


@dataclass
class PVector:
    """Column-wise l1 norms of the leading-block coefficients.

    ``coeffs[:, k-1]`` expresses column ``k`` in the first ``r`` columns and
    ``values[k-1]`` is its l1 norm.  The first ``r`` entries are exactly 1.
    """

    r: int
    values: np.ndarray
    image_condition_ok: bool
    coeffs: np.ndarray
    residuals: np.ndarray

    def to_text(self) -> str:
        return "".join(f"{k} {v:.17g}\n" for k, v in enumerate(self.values, start=1))


def _rank_and_block(V: np.ndarray, rank_tol: float) -> tuple[int, bool]:
    r = rank_estimate(V, rank_tol)
    if r == 0:
        return 0, False
    return r, rank_estimate(V[:, :r], rank_tol) == r


def p_vector(V, rank_tol: float = 1e-10, image_tol: float = 1e-8) -> PVector:
    """Compute the p-vector of `V`, factoring the leading block once.

    ``image_condition_ok`` is false when the first ``r = rank(V)`` columns do
    not have rank ``r`` or some column leaves a least-squares residual above
    `image_tol` (relative).  Values are still returned in the second case but
    certificates built on them refuse to run.
    """
    V = check_matrix(V, "V")
    m, n = V.shape
    r, lead_ok = _rank_and_block(V, rank_tol)
    if not lead_ok:
        nan = np.full(n, np.nan)
        return PVector(r, nan, False, np.full((max(r, 1), n), np.nan), nan)
    block = LeadingBlock(V, r, rank_tol)
    coeffs = block.all_coeffs()
    residuals = block.relative_residuals(coeffs)
    values = np.abs(coeffs).sum(axis=0)
    values[:r] = 1.0
    ok = bool(np.all(residuals <= image_tol))
    return PVector(r, values, ok, coeffs, residuals)


@dataclass
class FailureCertificate:
    """Columns at which a sparsest solution cannot be recovered by basis pursuit.

    Any ``u`` with a nonzero at an index in ``failure_indices`` cannot solve
    both the l0 problem and basis pursuit.  ``tail_from`` is set when the
    certificate covers every index ``>= tail_from`` for any horizon.
    """

    route: str
    r: int
    failure_indices: list[int] = field(default_factory=list)
    critical_index: int | None = None
    unimodality_certified: bool = False
    char_poly_coeff_sum: float | None = None
    marginal_indices: list[int] = field(default_factory=list)
    tail_from: int | None = None
    tol: float = P_TOL
    probes: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return bool(self.failure_indices) or self.tail_from is not None

    def to_dict(self) -> dict:
        return {
            "route": self.route,
            "r": self.r,
            "failure_indices": list(self.failure_indices),
            "critical_index": self.critical_index,
            "unimodality_certified": self.unimodality_certified,
            "char_poly_coeff_sum": self.char_poly_coeff_sum,
            "marginal_indices": list(self.marginal_indices),
            "tail_from": self.tail_from,
            "tol": self.tol,
            "probes": self.probes,
            "details": self.details,
        }


def _require_image(pv: PVector) -> None:
    if not pv.image_condition_ok:
        raise ImageConditionError(
            "columns of V do not all lie in the image of its leading rank-r block"
        )


def failure_indices(V, tol: float = P_TOL, pvec: PVector | None = None) -> FailureCertificate:
    """Full scan: every ``k > r`` with ``p_k < 1 - tol``.

    Indices with ``|1 - p_k| <= tol`` are reported as marginal and excluded.
    """
    pv = pvec if pvec is not None else p_vector(V)
    _require_image(pv)
    k = np.arange(1, pv.values.size + 1)
    tail = k > pv.r
    fail = k[tail & (pv.values < 1 - tol)]
    marginal = k[tail & (np.abs(pv.values - 1) <= tol)]
    return FailureCertificate(
        "full_scan",
        pv.r,
        [int(i) for i in fail],
        critical_index=int(fail[0]) if fail.size else None,
        marginal_indices=[int(i) for i in marginal],
        tol=tol,
    )


# ---------------------------------------------------------------------------
# companion-polynomial route


def _krylov(A: np.ndarray, b: np.ndarray, N: int) -> np.ndarray:
    cols = np.empty((A.shape[0], N))
    cols[:, 0] = b
    for i in range(1, N):
        cols[:, i] = A @ cols[:, i - 1]
    return cols


def certify_drastic_failure(
    A, b, horizon: int | None = None, tol: float = P_TOL, rank_tol: float = 1e-10
) -> FailureCertificate:
    """Certify failure at every column beyond the controllable rank.

    With ``r`` the rank of ``[b, Ab, A^2 b, ...]``, the dynamics projected on
    the controllable subspace is a companion matrix whose last column holds
    the coordinates ``c`` of ``A^r b`` in ``b, ..., A^{r-1} b``.  Its
    characteristic polynomial is ``s^r - c_r s^{r-1} - ... - c_1``.  When the
    absolute coefficients sum below one, ``p_k < 1`` for every ``k > r``.

    The characteristic polynomial of the full ``A`` is reported alongside for
    comparison only; it is not what the certificate uses.
    """
    A = check_matrix(A, "A")
    m = A.shape[0]
    if A.shape != (m, m):
        raise ValueError(f"A must be square, got {A.shape}")
    b = check_vector(b, "b", m)
    a_poly = np.real_if_close(np.poly(A)).astype(float)
    details = {
        "a_char_poly": [float(v) for v in a_poly],
        "a_char_poly_coeff_sum": float(np.abs(a_poly[1:]).sum()),
    }
    K = _krylov(A, b, m + 1)
    r = rank_estimate(K[:, :m], rank_tol) if np.any(b) else 0
    if r == 0:
        details["reason"] = "b = 0, nothing is reachable"
        return FailureCertificate("thm_char_poly", 0, tol=tol, details=details)
    c = LeadingBlock(K[:, : r + 1], r, rank_tol).coeffs(r + 1)
    # descending coefficients [1, alpha_{r-1}, ..., alpha_0], alpha_{i-1} = -c_i
    poly = np.concatenate([[1.0], -c[::-1]])
    total = float(np.abs(c).sum())
    details.update(
        char_poly=[float(v) for v in poly],
        companion_last_column=[float(v) for v in c],
    )
    cert = FailureCertificate(
        "thm_char_poly", r, char_poly_coeff_sum=total, tol=tol, details=details
    )
    if 1.0 - total > tol:
        cert.tail_from = r + 1
        if horizon is not None:
            cert.failure_indices = list(range(r + 1, int(horizon) + 1))
        cert.critical_index = r + 1
    return cert


# ---------------------------------------------------------------------------
# unimodality route


@dataclass
class UnimodalityCertificate:
    certified: bool
    r: int
    projected: bool
    sign_consistency: StructureReport | None = None
    variation_bounding: StructureReport | None = None
    leading_det_ok: bool = False
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "r": self.r,
            "projected": self.projected,
            "sign_consistency": self.sign_consistency.to_dict() if self.sign_consistency else None,
            "variation_bounding": (
                self.variation_bounding.to_dict() if self.variation_bounding else None
            ),
            "leading_det_ok": self.leading_det_ok,
            "reason": self.reason,
        }


def certify_unimodality(V, pvec: PVector | None = None) -> UnimodalityCertificate:
    """Sufficient conditions for a unimodal p-vector.

    Requires ``V.T`` to be ``m``-sign consistent, the row forward difference
    of ``V.T`` to be ``(m-1)``-variation bounding, and a nonsingular leading
    ``m x m`` block.  Rank-deficient ``V`` is first projected onto its leading
    ``r`` columns (``pinv(V[:, :r]) @ V``), which leaves the p-vector
    unchanged.  An uncertified result is not a claim that p is multimodal.
    """
    V = check_matrix(V, "V")
    pv = pvec if pvec is not None else p_vector(V)
    r = pv.r
    if not pv.image_condition_ok:
        return UnimodalityCertificate(False, r, False, reason="image condition violated")
    projected = r < V.shape[0]
    W = pv.coeffs if projected else V
    n = W.shape[1]
    if not r < n:
        return UnimodalityCertificate(False, r, projected, reason="needs more columns than rank")
    lead = W[:, :r]
    det_ok = abs(np.linalg.det(lead)) > SIGN_TOL * float(hadamard_bound(lead))
    try:
        sc = verify_sign_consistent(W.T, r)
        vb = verify_variation_bounding(forward_difference(W.T), r - 1)
    except CompoundTooLargeError as exc:
        return UnimodalityCertificate(False, r, projected, leading_det_ok=det_ok,
                                      reason=f"sign pattern intractable: {exc}")
    certified = bool(sc.holds) and bool(vb.holds) and det_ok
    reason = "" if certified else ", ".join(
        msg for ok, msg in [
            (sc.holds, "V^T not sign consistent"),
            (vb.holds, f"forward difference not variation bounding ({vb.status})"),
            (det_ok, "leading block singular"),
        ] if not ok
    )
    return UnimodalityCertificate(certified, r, projected, sc, vb, det_ok, reason)


def critical_index(V, tol: float = P_TOL) -> FailureCertificate:
    """Smallest failing column, by bisection when unimodality is certified.

    Each bisection probe is one solve against the cached leading-block
    factorization.  Without a unimodality certificate the full p-vector is
    scanned instead.
    """
    V = check_matrix(V, "V")
    pv_probe = p_vector(V)
    _require_image(pv_probe)
    uni = certify_unimodality(V, pv_probe)
    if not uni.certified:
        cert = failure_indices(V, tol, pv_probe)
        cert.details["unimodality"] = uni.to_dict()
        return cert

    r, n = pv_probe.r, V.shape[1]
    block = LeadingBlock(V, r)
    probes = 0

    def fails(k: int) -> bool:
        nonlocal probes
        probes += 1
        return 1.0 - float(np.abs(block.coeffs(k)).sum()) > tol

    cert = FailureCertificate(
        "thm_unimodal_bisection", r, unimodality_certified=True, tol=tol,
        details={"unimodality": uni.to_dict()},
    )
    if n <= r or not fails(n):
        cert.probes = probes
        return cert
    lo, hi = r + 1, n  # fails(hi) holds
    while lo < hi:
        mid = (lo + hi) // 2
        if fails(mid):
            hi = mid
        else:
            lo = mid + 1
    cert.critical_index = hi
    cert.failure_indices = list(range(hi, n + 1))
    cert.probes = probes
    return cert


# ---------------------------------------------------------------------------
# log-concave sequences


@dataclass
class GSequences:
    """``g[i, k-1] = (K_r^T c_{r+k})_i`` and ``p[k-1] = sum_i g[i, k-1]``.

    ``c_{r+k}`` are the leading-block coordinates of column ``r+k``.  When
    ``sign_consistent`` holds every row of ``g`` and ``p`` are log-concave.
    """

    g: np.ndarray
    p: np.ndarray
    r: int
    sign_consistent: bool
    sc_report: StructureReport | None = None

    @property
    def log_concavity_guaranteed(self) -> bool:
        return self.sign_consistent


def g_sequences(A, b, N: int, T=None, rank_tol: float = 1e-10) -> GSequences:
    """Transformed coordinate sequences of ``T @ [b, Ab, ...]`` for ``k = 1..N``.

    With ``T`` given (invertible), the coordinates are those of the
    similarity-transformed columns; they coincide with ``T = I`` up to
    rounding, which is why log-concavity carries over to Hankel and Page
    matrices.
    """
    A = check_matrix(A, "A")
    m = A.shape[0]
    b = check_vector(b, "b", m)
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    C = _krylov(A, b, m + N)
    r = rank_estimate(C[:, :m], rank_tol)
    C = C[:, : r + N]
    V = C if T is None else check_matrix(T, "T") @ C
    block = LeadingBlock(V, r, rank_tol)
    coeffs = block.solve(V[:, r:])
    g = antidiag_K(r).T @ coeffs
    try:
        sc = verify_sign_consistent(C.T, r)
    except CompoundTooLargeError:
        sc = None
    return GSequences(g, g.sum(axis=0), r, bool(sc and sc.holds), sc)


# ---------------------------------------------------------------------------
# uniqueness


@dataclass
class UniquenessCertificate:
    """Sufficient test for a unique sparsest solution.

    ``unique=False`` never asserts non-uniqueness; ``status`` tells whether
    the sparsity bound or the column-independence check is what failed.
    """

    cardinality: int
    bound: int
    independence_ok: bool | None
    unique: bool
    route: str
    status: str
    support: list[int] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "cardinality": self.cardinality,
            "bound": self.bound,
            "independence_ok": self.independence_ok,
            "unique": self.unique,
            "route": self.route,
            "status": self.status,
            "support": list(self.support),
            "details": self.details,
        }


def _independence(V: np.ndarray, max_subsets: int, details: dict) -> tuple[bool | None, str]:
    m, n = V.shape
    if n <= m:
        return rank_estimate(V) == n, "rank"
    try:
        sc = verify_sign_consistent(V.T, m, strict=True)
    except CompoundTooLargeError:
        sc = None
    if sc is not None and sc.holds:
        details["strict_sign_consistency"] = sc.to_dict()
        try:
            pena = verify_pena_strict(V.T)
        except SingularBlockError:
            return False, "pena"
        details["pena"] = pena.to_dict()
        if pena.holds is not None:
            return pena.holds, "pena"
        # no negative minor, only dead-zone ones: the strict consecutive-minor
        # certificate already makes every m-minor nonzero
        if sc.route == "consecutive":
            return True, "pena_deadzone_consecutive"
    if comb(n, m) <= max_subsets:
        for cols in itertools.combinations(range(n), m):
            sub = V[:, cols]
            if abs(np.linalg.det(sub)) <= SIGN_TOL * float(hadamard_bound(sub.T)):
                return False, "brute_force"
        return True, "brute_force"
    return None, "intractable"


def uniqueness_check(
    V, u, y=None, threshold: float = 1e-6, max_subsets: int = 10**5
) -> UniquenessCertificate:
    """Certify that `u` is the unique sparsest solution of ``V x = V u``.

    Needs ``||u||_0 <= floor(m/2)`` and every ``m`` columns of `V`
    independent.  Independence goes through the Peña transform when ``V.T``
    is strictly ``m``-sign consistent, by enumerating ``m``-subsets when there are at
    most `max_subsets` of them, and is otherwise left inconclusive.
    """
    V = check_matrix(V, "V")
    m, n = V.shape
    u = check_vector(u, "u", n)
    if y is not None:
        y = check_vector(y, "y", m)
        if np.linalg.norm(V @ u - y) > 1e-8 * max(np.linalg.norm(y), np.finfo(float).tiny):
            raise ValueError("V @ u does not reproduce y")
    umax = float(np.max(np.abs(u))) if u.size else 0.0
    support = [int(i) + 1 for i in np.flatnonzero(np.abs(u) > threshold * umax)] if umax > 0 else []
    card, bound = len(support), m // 2
    details: dict = {}
    indep, route = _independence(V, max_subsets, details)
    unique = card <= bound and indep is True
    if unique:
        status = "unique"
    elif card > bound:
        status = "bound_exceeded"
    elif indep is None:
        status = "inconclusive"
    else:
        status = "independence_failed"
    return UniquenessCertificate(card, bound, indep, unique, route, status, support, details)


# ---------------------------------------------------------------------------
# dual certificate


@dataclass
class DualCertificateVerdict:
    """Whether some ``beta`` with ``||V^T beta||_inf <= 1`` is aligned with ``u``.

    ``feasible=False`` proves ``u`` is not a basis pursuit minimizer;
    ``status == "numeric_failure"`` means the LP could not decide.
    """

    feasible: bool | None
    status: str
    fixed: dict[int, int]
    beta: np.ndarray | None = None
    reduced: bool = False

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "status": self.status,
            "fixed": {str(k): v for k, v in self.fixed.items()},
            "beta": None if self.beta is None else [float(v) for v in self.beta],
            "reduced": self.reduced,
        }


def dual_certificate_check(V, u, threshold: float = 1e-6) -> DualCertificateVerdict:
    """Search for a dual vector aligned with `u` (necessary for BP optimality).

    When every column lies in the image of the leading rank-``r`` block the
    LP is posed in those coordinates (``beta~ = V1^T beta``), which is
    equivalent and far better scaled for controllability-type matrices.
    """
    from .solvers import lp_feasibility

    V = check_matrix(V, "V")
    u = check_vector(u, "u", V.shape[1])
    umax = float(np.max(np.abs(u)))
    fixed = {}
    if umax > 0:
        fixed = {int(i) + 1: int(np.sign(u[i])) for i in np.flatnonzero(np.abs(u) > threshold * umax)}
    pv = p_vector(V)
    if pv.image_condition_ok:
        res = lp_feasibility(pv.coeffs, fixed)
        beta = None
        if res.beta is not None:
            beta = np.linalg.pinv(V[:, : pv.r].T) @ res.beta
        return DualCertificateVerdict(res.feasible, res.status, fixed, beta, True)
    res = lp_feasibility(V, fixed)
    return DualCertificateVerdict(res.feasible, res.status, fixed, res.beta, False)


# ---------------------------------------------------------------------------
# small utilities


def sign_transform(V, t) -> np.ndarray:
    """``V @ diag(t)``; rescaling unknowns leaves the l0 problem unchanged."""
    V = check_matrix(V, "V")
    t = check_vector(t, "t", V.shape[1])
    if np.any(t == 0):
        raise ValueError("scale entries must be nonzero")
    return V * t


def column_coherence(V) -> float:
    """Largest absolute cosine similarity between two distinct columns."""
    V = check_matrix(V, "V")
    norms = np.linalg.norm(V, axis=0)
    if np.any(norms == 0):
        raise ValueError("V has a zero column")
    if V.shape[1] < 2:
        return 0.0
    G = np.abs((V / norms).T @ (V / norms))
    np.fill_diagonal(G, 0.0)
    return float(min(G.max(), 1.0))
