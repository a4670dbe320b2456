"""Continuous algebraic Riccati equations via the ordered Hamiltonian Schur form.

Solves

    A'X + XA - (XB + S) R^-1 (B'X + S') + Q = 0

for the stabilizing solution. ``R`` only has to be invertible, which is what
the H-infinity feasibility test needs (its ``R`` is indefinite).
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla

#: eigenvalues with |Re| below this (relative to 1 + |lambda|) count as imaginary
IMAG_AXIS_TOL = 1e-8


class RiccatiError(ArithmeticError):
    """No stabilizing solution exists (or it could not be computed reliably)."""


def hamiltonian_ric(H: np.ndarray, imag_tol: float = IMAG_AXIS_TOL) -> np.ndarray:
    """Stabilizing solution ``X = Ric(H)`` of a 2n x 2n Hamiltonian matrix.

    Raises :class:`RiccatiError` if ``H`` has eigenvalues on the imaginary
    axis or the stable invariant subspace is not complementary to
    ``span[0; I]``.
    """
    n2 = H.shape[0]
    n = n2 // 2
    # diagonal balancing: the stable subspace of D^-1 H D is D^-1 times that of H
    Hb, (scale, _) = sla.matrix_balance(H, permute=False, separate=True)
    T, U, sdim = sla.schur(Hb, output="real", sort="lhp")
    eig = np.linalg.eigvals(T)
    if np.any(np.abs(eig.real) < imag_tol * (1.0 + np.abs(eig))):
        raise RiccatiError("Hamiltonian has eigenvalues on the imaginary axis")
    if sdim != n:
        raise RiccatiError(f"stable subspace has dimension {sdim}, expected {n}")
    basis, _ = np.linalg.qr(scale[:, None] * U[:, :n])
    U11 = basis[:n]
    U21 = basis[n:]
    if np.linalg.cond(U11) > 1e12:
        raise RiccatiError("stable subspace is not a graph subspace (U11 singular)")
    X = np.linalg.solve(U11.T, U21.T).T
    return 0.5 * (X + X.T)


def riccati_residual(A, B, Q, R, X, S=None) -> np.ndarray:
    B = np.atleast_2d(B)
    S = np.zeros_like(B) if S is None else np.atleast_2d(S)
    K = np.linalg.solve(np.atleast_2d(R), B.T @ X + S.T)
    return A.T @ X + X @ A - (X @ B + S) @ K + Q


def solve_riccati(A, B, Q, R, S=None, refine: int = 2,
                  imag_tol: float = IMAG_AXIS_TOL) -> np.ndarray:
    """Stabilizing solution of the general CARE with cross term ``S``.

    The Schur-method solution is polished by up to ``refine`` Newton
    (Kleinman) steps; a step is kept only if it lowers the residual.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    n = A.shape[0]
    if B.shape[0] != n:
        B = B.reshape(n, -1)
    S = np.zeros_like(B) if S is None else np.atleast_2d(np.asarray(S, dtype=float)).reshape(B.shape)
    Q = 0.5 * (Q + Q.T)
    R = 0.5 * (R + R.T)
    try:
        Rinv_St = np.linalg.solve(R, S.T)
        Rinv_Bt = np.linalg.solve(R, B.T)
    except np.linalg.LinAlgError as exc:
        raise RiccatiError("R is singular") from exc

    Abar = A - B @ Rinv_St
    G = B @ Rinv_Bt
    Qbar = Q - S @ Rinv_St
    G = 0.5 * (G + G.T)
    Qbar = 0.5 * (Qbar + Qbar.T)
    H = np.block([[Abar, -G], [-Qbar, -Abar.T]])
    X = hamiltonian_ric(H, imag_tol=imag_tol)

    def resid(X):
        return Abar.T @ X + X @ Abar - X @ G @ X + Qbar

    best = np.linalg.norm(resid(X))
    for _ in range(refine):
        Acl = Abar - G @ X
        try:
            # near-singular steps are harmless: they are rejected by the residual test
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                Xn = sla.solve_continuous_lyapunov(Acl.T, -(Qbar + X @ G @ X))
        except (np.linalg.LinAlgError, ValueError):
            break
        Xn = 0.5 * (Xn + Xn.T)
        r = np.linalg.norm(resid(Xn))
        if not np.isfinite(r) or r >= best:
            break
        X, best = Xn, r

    if np.max(np.linalg.eigvals(Abar - G @ X).real) >= 0:
        raise RiccatiError("solution is not stabilizing")
    return X


def solve_care(A, B, Q, R) -> np.ndarray:
    """Stabilizing ``X`` of ``A'X + XA - X B R^-1 B' X + Q = 0``.

    >>> round(float(solve_care([[1.0]], [[1.0]], [[1.0]], [[1.0]])[0, 0]), 12)  # 1 + sqrt(2)
    2.414213562373
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if not np.allclose(R, R.T) or np.min(np.linalg.eigvalsh(0.5 * (R + R.T))) <= 0:
        raise ValueError("R must be symmetric positive definite")
    return solve_riccati(A, B, Q, R)
