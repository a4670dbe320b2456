import math

import numpy as np
import pytest
from scipy.linalg import solve_continuous_are

from reliable_drive.control import RiccatiError, solve_care, solve_riccati
from reliable_drive.control.riccati import riccati_residual


def random_care(rng, n, m):
    A = rng.normal(size=(n, n))
    B = rng.normal(size=(n, m))
    C = rng.normal(size=(max(1, n // 2), n))
    L = rng.normal(size=(m, m))
    return A, B, C.T @ C, L @ L.T + 0.1 * np.eye(m)


def test_identity_problem():
    n = 3
    X = solve_care(np.zeros((n, n)), np.eye(n), np.eye(n), np.eye(n))
    np.testing.assert_allclose(X, np.eye(n), atol=1e-12)


def test_scalar_root():
    X = solve_care([[1.0]], [[1.0]], [[1.0]], [[1.0]])
    assert X[0, 0] == pytest.approx(1 + math.sqrt(2), rel=1e-13)


def test_stable_zero_cost():
    X = solve_care([[-1.0]], [[1.0]], [[0.0]], [[1.0]])
    assert X[0, 0] == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("seed", range(20))
def test_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    A, B, Q, R = random_care(rng, n, int(rng.integers(1, n + 1)))
    X = solve_care(A, B, Q, R)
    ref = solve_continuous_are(A, B, Q, R)
    np.testing.assert_allclose(X, ref, rtol=1e-7, atol=1e-9 * (1 + np.linalg.norm(ref)))


def test_residual_and_stability_random():
    rng = np.random.default_rng(1234)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        A, B, Q, R = random_care(rng, n, int(rng.integers(1, n + 1)))
        X = solve_care(A, B, Q, R)
        res = np.linalg.norm(riccati_residual(A, B, Q, R, X), "fro")
        assert res <= 1e-8 * (1 + np.linalg.norm(X, "fro"))
        np.testing.assert_array_equal(X, X.T)
        K = np.linalg.solve(R, B.T @ X)
        assert np.max(np.linalg.eigvals(A - B @ K).real) < 0


def test_cross_term_matches_scipy():
    rng = np.random.default_rng(5)
    A, B, Q, R = random_care(rng, 4, 2)
    S = 0.1 * rng.normal(size=(4, 2))
    Q = Q + S @ np.linalg.solve(R, S.T)  # keep the joint cost PSD
    X = solve_riccati(A, B, Q, R, S=S)
    np.testing.assert_allclose(X, solve_continuous_are(A, B, Q, R, s=S), rtol=1e-7, atol=1e-10)


def test_indefinite_r_allowed_in_general_solver():
    # game-type equation from the H-infinity filter: R = diag(1, -gamma^2)
    A = np.array([[-1.0, 0.5], [0.0, -2.0]])
    B = np.eye(2)
    Q = np.eye(2)
    R = np.diag([1.0, -25.0])
    X = solve_riccati(A, B, Q, R)
    assert np.linalg.norm(riccati_residual(A, B, Q, R, X)) < 1e-10


def test_no_stabilizing_solution():
    # uncontrollable mode on the imaginary axis
    with pytest.raises(RiccatiError):
        solve_care([[0.0]], [[0.0]], [[1.0]], [[1.0]])


def test_care_needs_positive_definite_r():
    with pytest.raises(ValueError):
        solve_care([[1.0]], [[1.0]], [[1.0]], [[-1.0]])
