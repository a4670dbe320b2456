"""H-infinity output-feedback synthesis by two-Riccati gamma iteration.

The plant is first normalized (orthogonal rotations of ``z`` and ``w``,
invertible scalings of ``u`` and ``y``) so that ``D12 = [0; I]`` and
``D21 = [0, I]``. Feasibility at a level ``gamma`` needs stabilizing
``X >= 0``, ``Y >= 0`` with ``rho(XY) < gamma^2``; the returned controller is
the central one (free parameter ``Q = 0``), which admits a nonzero ``D11``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .norms import hinf_norm
from .plant import GeneralizedPlant
from .riccati import RiccatiError, solve_riccati
from .statespace import StateSpaceModel, discretize

MODES = ("performance_oriented", "reliability_aware")
CONTROLLER_SCHEMA = "reliable_drive.controller/1"


class SynthesisError(ArithmeticError):
    def __init__(self, msg: str, gamma: Optional[float] = None):
        super().__init__(msg)
        self.gamma = gamma


@dataclass(frozen=True)
class ControllerRealization:
    continuous: StateSpaceModel
    discrete: StateSpaceModel
    gamma_achieved: float
    mode_tag: str

    def to_dict(self) -> dict:
        return {
            "schema": CONTROLLER_SCHEMA,
            "mode_tag": self.mode_tag,
            "gamma_achieved": self.gamma_achieved,
            "dt": self.discrete.dt,
            "continuous": self.continuous.to_dict(),
            "discrete": self.discrete.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ControllerRealization":
        if d.get("schema") != CONTROLLER_SCHEMA:
            raise ValueError(f"unsupported controller schema {d.get('schema')!r}")
        if d["mode_tag"] not in MODES:
            raise ValueError(f"unknown mode_tag {d['mode_tag']!r}")
        disc = StateSpaceModel.from_dict(d["discrete"])
        if disc.dt is None or disc.dt != d["dt"]:
            raise ValueError("discrete realization dt does not match header dt")
        return cls(StateSpaceModel.from_dict(d["continuous"]), disc,
                   float(d["gamma_achieved"]), d["mode_tag"])

    @classmethod
    def from_json(cls, text: str) -> "ControllerRealization":
        return cls.from_dict(json.loads(text))


@dataclass
class _Normalized:
    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    D11: np.ndarray
    Ru: np.ndarray  # u = Ru @ u_normalized
    Ty: np.ndarray  # y_normalized = Ty @ y


def _normalize(plant: GeneralizedPlant) -> _Normalized:
    A, B1, B2, C1, C2, D11, D12, D21, D22 = plant.blocks()
    if np.any(D22):
        raise SynthesisError("nonzero D22 is not supported")
    m2 = D12.shape[1]
    p2 = D21.shape[0]

    U, s, Vt = np.linalg.svd(D12)
    if s.min() <= 1e-14 * max(1.0, s.max()):
        raise SynthesisError("D12 does not have full column rank")
    theta = np.hstack([U[:, m2:], U[:, :m2]])
    Ru = Vt.T / s

    U2, s2, Vt2 = np.linalg.svd(D21)
    if s2.min() <= 1e-14 * max(1.0, s2.max()):
        raise SynthesisError("D21 does not have full row rank")
    psi = np.hstack([Vt2[p2:].T, Vt2[:p2].T])
    Ty = (U2 / s2).T

    return _Normalized(
        A=A, B1=B1 @ psi, B2=B2 @ Ru, C1=theta.T @ C1, C2=Ty @ C2,
        D11=theta.T @ D11 @ psi, Ru=Ru, Ty=Ty,
    )


def _inv_psd_gap(gamma: float, M: np.ndarray) -> np.ndarray:
    """``(gamma^2 I - M)^-1``."""
    return np.linalg.inv(gamma**2 * np.eye(M.shape[0]) - M)


def _central_controller(N: _Normalized, gamma: float, tol: float = 1e-9):
    """Central controller of the normalized problem at ``gamma``; raises if infeasible."""
    A, B1, B2, C1, C2, D11 = N.A, N.B1, N.B2, N.C1, N.C2, N.D11
    n = A.shape[0]
    m1, m2 = B1.shape[1], B2.shape[1]
    p1, p2 = C1.shape[0], C2.shape[0]
    r1, c1 = p1 - m2, m1 - p2  # row/col split of D11

    D1111, D1112 = D11[:r1, :c1], D11[:r1, c1:]
    D1121, D1122 = D11[r1:, :c1], D11[r1:, c1:]
    lim = 0.0
    for M in (np.hstack([D1111, D1112]), np.hstack([D1111.T, D1121.T])):
        if M.size:
            lim = max(lim, np.linalg.norm(M, 2))
    if gamma <= lim * (1 + tol):
        raise SynthesisError("gamma below the feedthrough bound", gamma)

    D12 = np.vstack([np.zeros((r1, m2)), np.eye(m2)])
    D21 = np.hstack([np.zeros((p2, c1)), np.eye(p2)])
    D1dot = np.hstack([D11, D12])
    Ddot1 = np.vstack([D11, D21])
    B = np.hstack([B1, B2])
    C = np.vstack([C1, C2])
    R = D1dot.T @ D1dot
    R[:m1, :m1] -= gamma**2 * np.eye(m1)
    Rt = Ddot1 @ Ddot1.T
    Rt[:p1, :p1] -= gamma**2 * np.eye(p1)

    try:
        X = solve_riccati(A, B, C1.T @ C1, R, S=C1.T @ D1dot)
        Y = solve_riccati(A.T, C.T, B1 @ B1.T, Rt, S=B1 @ Ddot1.T)
    except (RiccatiError, np.linalg.LinAlgError) as exc:
        raise SynthesisError(f"Riccati equation has no stabilizing solution: {exc}", gamma)

    scale_x = max(1.0, np.abs(X).max())
    scale_y = max(1.0, np.abs(Y).max())
    if np.linalg.eigvalsh(X).min() < -tol * scale_x or np.linalg.eigvalsh(Y).min() < -tol * scale_y:
        raise SynthesisError("Riccati solution is not positive semidefinite", gamma)
    rho = np.max(np.abs(np.linalg.eigvals(X @ Y)))
    if rho >= gamma**2 * (1 - tol):
        raise SynthesisError("spectral radius condition rho(XY) < gamma^2 fails", gamma)

    F = -np.linalg.solve(R, D1dot.T @ C1 + B.T @ X)
    L = -np.linalg.solve(Rt.T, (B1 @ Ddot1.T + Y @ C.T).T).T
    F12, F2 = F[c1:m1], F[m1:]
    L12, L2 = L[:, r1:p1], L[:, p1:]

    g1 = _inv_psd_gap(gamma, D1111 @ D1111.T)
    g2 = _inv_psd_gap(gamma, D1111.T @ D1111)
    Dh11 = -D1121 @ D1111.T @ g1 @ D1112 - D1122
    Dh12 = np.linalg.cholesky(np.eye(m2) - D1121 @ g2 @ D1121.T)
    Dh21 = np.linalg.cholesky(np.eye(p2) - D1112.T @ g1 @ D1112).T

    Z = np.linalg.inv(np.eye(n) - Y @ X / gamma**2)
    Bh2 = Z @ (B2 + L12) @ Dh12
    Ch2 = -Dh21 @ (C2 + F12)
    Bh1 = -Z @ L2 + Bh2 @ np.linalg.solve(Dh12, Dh11)
    Ch1 = F2 + Dh11 @ np.linalg.solve(Dh21, Ch2)
    Ah = A + B @ F + Bh1 @ np.linalg.solve(Dh21, Ch2)
    return Ah, Bh1, Ch1, Dh11


def _controller(plant: GeneralizedPlant, N: _Normalized, gamma: float) -> StateSpaceModel:
    Ah, Bh, Ch, Dh = _central_controller(N, gamma)
    y_labels = plant.realization.output_labels[plant.n_z:]
    u_labels = plant.realization.input_labels[plant.n_w:]
    return StateSpaceModel(Ah, Bh @ N.Ty, N.Ru @ Ch, N.Ru @ Dh @ N.Ty,
                           input_labels=y_labels, output_labels=u_labels)


def is_feasible(plant: GeneralizedPlant, gamma: float) -> bool:
    try:
        _central_controller(_normalize(plant), gamma)
    except SynthesisError:
        return False
    return True


def synthesize(plant: GeneralizedPlant, gamma_range=(1e-3, 1e6), tol: float = 1e-3,
               dt: float = 1e-3, mode_tag: str = "performance_oriented",
               backoff: float = 1.0) -> ControllerRealization:
    """Smallest feasible ``gamma`` in ``gamma_range`` and its central controller.

    The search runs over the geometric lattice ``(1 + tol)**k`` so the result
    does not depend on where the bracket ends, only on which lattice points
    it contains. ``backoff >= 1`` builds the controller at
    ``backoff * gamma_opt`` instead of at the optimum; ``gamma_achieved`` is
    the level actually used.
    """
    if mode_tag not in MODES:
        raise ValueError(f"mode_tag must be one of {MODES}")
    lo, hi = map(float, gamma_range)
    if not 0 < lo < hi:
        raise ValueError("gamma_range must satisfy 0 < lo < hi")
    if backoff < 1:
        raise ValueError("backoff must be >= 1")
    N = _normalize(plant)

    def feasible(g):
        try:
            _central_controller(N, g)
        except SynthesisError:
            return False
        return True

    if not feasible(hi):
        raise SynthesisError(f"upper bound gamma={hi:g} is infeasible", hi)
    base = math.log1p(tol)
    k_lo = math.floor(math.log(lo) / base)
    k_hi = math.ceil(math.log(hi) / base)
    if feasible(math.exp(k_lo * base)):
        k_best = k_lo
    else:
        # invariant: lattice point k_lo infeasible, k_hi feasible (>= hi)
        while k_hi - k_lo > 1:
            k_mid = (k_lo + k_hi) // 2
            if feasible(math.exp(k_mid * base)):
                k_hi = k_mid
            else:
                k_lo = k_mid
        k_best = k_hi
    gamma = math.exp(k_best * base) * backoff
    K = _controller(plant, N, gamma)
    return ControllerRealization(K, discretize(K, dt), float(gamma), mode_tag)


def close_loop(plant: GeneralizedPlant, K) -> StateSpaceModel:
    """Lower LFT ``F_l(P, K)``: the closed-loop map ``w -> z``."""
    Ks = K.continuous if isinstance(K, ControllerRealization) else K
    A, B1, B2, C1, C2, D11, D12, D21, D22 = plant.blocks()
    AK, BK, CK, DK = Ks.A, Ks.B, Ks.C, Ks.D
    if DK.shape != (plant.n_u, plant.n_y):
        raise ValueError("controller dimensions do not match the plant")
    m2, p2 = plant.n_u, plant.n_y
    W1 = np.eye(m2) - DK @ D22
    W2 = np.eye(p2) - D22 @ DK
    if np.linalg.cond(W1) > 1e12:
        raise ValueError("ill-posed interconnection: I - D22*DK is singular")
    Phi = np.linalg.inv(W1)
    Psi = np.linalg.inv(W2)
    Acl = np.block([
        [A + B2 @ Phi @ DK @ C2, B2 @ Phi @ CK],
        [BK @ Psi @ C2, AK + BK @ Psi @ D22 @ CK],
    ])
    Bcl = np.vstack([B1 + B2 @ Phi @ DK @ D21, BK @ Psi @ D21])
    Ccl = np.hstack([C1 + D12 @ Phi @ DK @ C2, D12 @ Phi @ CK])
    Dcl = D11 + D12 @ Phi @ DK @ D21
    r = plant.realization
    return StateSpaceModel(Acl, Bcl, Ccl, Dcl, input_labels=r.input_labels[:plant.n_w],
                           output_labels=r.output_labels[:plant.n_z])


def verify(plant: GeneralizedPlant, K: ControllerRealization, tol: float = 1e-3):
    """Closed-loop spectral abscissa and H-infinity norm of ``F_l(P, K)``."""
    cl = close_loop(plant, K)
    abscissa = float(np.max(cl.poles().real))
    norm = hinf_norm(cl) if abscissa < 0 else math.inf
    return abscissa, norm
