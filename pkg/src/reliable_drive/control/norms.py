"""H-infinity norm of stable continuous-time systems."""

from __future__ import annotations

import numpy as np

from .statespace import StateSpaceModel


class UnstableSystemError(ValueError):
    """The H-infinity norm of an unstable system is infinite."""


def sigma_max(sys: StateSpaceModel, omega: float) -> float:
    return float(np.linalg.norm(sys.evaluate(1j * omega), 2))


def sweep_peak(sys: StateSpaceModel, omega=None, n: int = 4000) -> float:
    """Largest singular value over a log-spaced frequency grid (plus DC)."""
    if omega is None:
        omega = np.concatenate(([0.0], np.logspace(-4, 6, n)))
    return max(sigma_max(sys, w) for w in omega)


def _imaginary_crossings(sys: StateSpaceModel, gamma: float, imag_tol: float) -> np.ndarray:
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    m = B.shape[1]
    p = C.shape[0]
    R = gamma**2 * np.eye(m) - D.T @ D
    Rinv = np.linalg.inv(R)
    Ah = A + B @ Rinv @ D.T @ C
    H = np.block([
        [Ah, B @ Rinv @ B.T],
        [-C.T @ (np.eye(p) + D @ Rinv @ D.T) @ C, -Ah.T],
    ])
    eig = np.linalg.eigvals(H)
    scale = 1.0 + np.abs(eig)
    on_axis = np.abs(eig.real) < imag_tol * scale
    return np.sort(eig[on_axis].imag)


def hinf_norm(sys: StateSpaceModel, tol: float = 1e-6, imag_tol: float = 1e-6,
              max_iter: int = 100) -> float:
    """``sup_w sigma_max(G(jw))`` of a stable continuous-time system.

    Level-set iteration on the imaginary-axis eigenvalues of the associated
    Hamiltonian: every lower bound is an attained singular value, and the
    loop stops once ``(1 + 2 tol)`` times that bound has no crossing.
    """
    if sys.is_discrete:
        raise ValueError("hinf_norm expects a continuous-time system")
    d_norm = float(np.linalg.norm(sys.D, 2)) if sys.D.size else 0.0
    if sys.n_states == 0:
        return d_norm
    poles = sys.poles()
    if np.max(poles.real) >= 0:
        raise UnstableSystemError("system is not asymptotically stable")
    if not np.any(sys.B) or not np.any(sys.C):
        return d_norm

    # initial lower bound: DC, feedthrough, and the resonant frequency of each pole
    cand = [0.0]
    for lam in poles:
        cand.append(abs(lam.imag))
        cand.append(abs(lam))
    lb = max([d_norm] + [sigma_max(sys, w) for w in cand])
    if lb == 0.0:
        return 0.0

    for _ in range(max_iter):
        gamma = (1.0 + 2.0 * tol) * lb
        w = _imaginary_crossings(sys, gamma, imag_tol)
        if w.size == 0:
            return lb
        mids = 0.5 * (w[:-1] + w[1:]) if w.size > 1 else w
        probe = np.unique(np.abs(np.concatenate((mids, w))))
        new_lb = max(sigma_max(sys, x) for x in probe)
        if new_lb <= lb:
            return lb
        lb = new_lb
    return lb
