import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from bpfail.estimators import BasisPursuit, FailureCertifier, L0Regressor
from bpfail.generators import LtiSystem, ctrb, fuel_instance
from bpfail.solvers import solve_bp

FIG = (0.8, 0.7, 0.6, 0.5, 0.4)


def test_params_and_clone():
    est = BasisPursuit(threshold=1e-5)
    assert est.get_params() == {"threshold": 1e-5, "feas_tol": 1e-8}
    assert clone(est).threshold == 1e-5
    assert L0Regressor(max_card=2).set_params(budget=5).budget == 5
    assert FailureCertifier().get_params()["bisection"] is True


def test_basis_pursuit_matches_function(rng):
    V = rng.standard_normal((3, 8))
    y = rng.standard_normal(3)
    est = BasisPursuit().fit(V, y)
    np.testing.assert_array_equal(est.coef_, solve_bp(V, y).u)
    np.testing.assert_allclose(est.predict(V), y, atol=1e-9)
    assert est.score(V, y) == pytest.approx(1.0)


def test_l0_regressor(rng):
    V = rng.standard_normal((3, 6))
    est = L0Regressor().fit(V, 2 * V[:, 4])
    assert est.support_ == [5] and est.n_solutions_ == 1


def test_l0_regressor_no_solution(rng):
    with pytest.raises(ValueError):
        L0Regressor(max_card=1).fit(rng.standard_normal((3, 5)), rng.standard_normal(3))


def test_not_fitted():
    with pytest.raises(NotFittedError):
        BasisPursuit().predict(np.eye(2))


def test_input_validation():
    with pytest.raises(ValueError):
        BasisPursuit().fit(np.eye(2), [1.0, np.nan])


def test_failure_certifier():
    inst = fuel_instance(LtiSystem.diagonal(FIG), 40, {0: 1.0, 9: -1.0})
    cert = FailureCertifier().fit(inst.V)
    assert cert.rank_ == 5 and cert.critical_index_ == 36
    U = np.zeros((3, 40))
    U[0] = inst.stacked()
    U[1, [0, 4]] = 1.0
    np.testing.assert_array_equal(cert.predict(U), [True, False, False])
    with pytest.raises(ValueError):
        cert.predict(np.zeros((1, 3)))


def test_failure_certifier_full_scan_agrees():
    V = ctrb(LtiSystem.diagonal(FIG), 50)
    a = FailureCertifier().fit(V)
    b = FailureCertifier(bisection=False).fit(V)
    assert a.failure_indices_ == b.failure_indices_
