"""scikit-learn style wrappers around the solvers and certificates.

The design matrix plays the role of ``V`` (rows are equations, columns are
unknowns) and the target is ``y``.  These estimators fit a single linear
system exactly; they are not statistical regressors, but sharing the API lets
them sit in pipelines and parameter searches.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .certify import P_TOL, critical_index, failure_indices, p_vector
from .solvers import solve_bp, solve_l0

__all__ = ["BasisPursuit", "FailureCertifier", "L0Regressor"]


class BasisPursuit(RegressorMixin, BaseEstimator):
    """Minimum l1-norm solution of ``V u = y``.

    Parameters
    ----------
    threshold : float, default=1e-6
        Relative magnitude below which entries are left out of ``support_``.
    feas_tol : float, default=1e-8
        Residual tolerance for accepting the LP solution.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    support_ : list of int
        1-based indices of the nonzero entries.
    dual_coef_ : ndarray of shape (n_equations,)
        Dual certificate ``beta`` with ``||V^T beta||_inf <= 1``.
    objective_ : float
    status_ : str
    """

    def __init__(self, threshold: float = 1e-6, feas_tol: float = 1e-8):
        self.threshold = threshold
        self.feas_tol = feas_tol

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        sol = solve_bp(X, y, feas_tol=self.feas_tol, threshold=self.threshold)
        self.n_features_in_ = X.shape[1]
        self.coef_ = sol.u
        self.support_ = sol.support
        self.dual_coef_ = sol.beta
        self.objective_ = sol.objective
        self.status_ = sol.status
        self.solution_ = sol
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return X @ self.coef_


class L0Regressor(RegressorMixin, BaseEstimator):
    """Sparsest solution of ``V u = y`` by exhaustive support search.

    Parameters
    ----------
    max_card : int, optional
        Largest support size searched; defaults to ``min(V.shape)``.
    res_tol : float, default=1e-8
        Relative residual accepted for a support.
    threshold : float, default=1e-6
    budget : int, default=10**7
        Maximum number of supports tested.

    Attributes
    ----------
    coef_ : ndarray
        First minimal solution in lexicographic support order.
    n_solutions_ : int
        Number of distinct minimal supports; more than one means the sparsest
        solution is not unique.
    report_ : L0Report
    """

    def __init__(self, max_card: int | None = None, res_tol: float = 1e-8,
                 threshold: float = 1e-6, budget: int = 10**7):
        self.max_card = max_card
        self.res_tol = res_tol
        self.threshold = threshold
        self.budget = budget

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        rep = solve_l0(X, y, self.max_card, self.res_tol, self.threshold, self.budget)
        self.n_features_in_ = X.shape[1]
        self.report_ = rep
        self.n_solutions_ = rep.count
        if not rep.solutions_found:
            raise ValueError("no solution within the searched cardinality")
        self.coef_ = rep.solutions_found[0].u
        self.support_ = rep.solutions_found[0].support
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return X @ self.coef_


class FailureCertifier(BaseEstimator):
    """Learn the columns of ``V`` at which basis pursuit provably fails.

    ``fit(V)`` computes the p-vector and the certified failure set.
    ``predict(U)`` flags every candidate row of `U` that has a nonzero entry
    in a certified column: such a candidate cannot be both the sparsest
    solution and the basis pursuit solution of ``V u = V U[i]``.

    Parameters
    ----------
    tol : float, default=1e-9
        Required margin ``1 - p_k``.
    bisection : bool, default=True
        Use the unimodal bisection search when its certificate holds.
    threshold : float, default=1e-6
        Relative magnitude for counting an entry of a candidate as nonzero.
    """

    def __init__(self, tol: float = P_TOL, bisection: bool = True, threshold: float = 1e-6):
        self.tol = tol
        self.bisection = bisection
        self.threshold = threshold

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        pv = p_vector(X)
        cert = critical_index(X, self.tol) if self.bisection else failure_indices(X, self.tol, pv)
        self.n_features_in_ = X.shape[1]
        self.p_ = pv.values
        self.rank_ = pv.r
        self.certificate_ = cert
        self.failure_indices_ = list(cert.failure_indices)
        self.critical_index_ = cert.critical_index
        return self

    def predict(self, X):
        check_is_fitted(self, "p_")
        U = check_array(X, dtype=np.float64)
        if U.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {U.shape[1]}")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[np.asarray(self.failure_indices_, dtype=int) - 1] = True
        scale = np.abs(U).max(axis=1, keepdims=True)
        nz = np.abs(U) > self.threshold * np.where(scale > 0, scale, 1.0)
        nz &= scale > 0
        return np.any(nz & mask, axis=1)
