"""Surface-mount PMSM in the rotor dq frame.

Only the mechanical speed is stored; the electrical speed is always derived
as ``p * omega_m``. The ``_rhs_*`` kernels are plain float functions compiled
with numba so the simulator can call the same equations in its inner loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .control.statespace import StateSpaceModel

SURFACE_MOUNT_TOL = 1e-6


@dataclass(frozen=True)
class MotorParams:
    R_s: float
    L_d: float
    L_q: float
    Phi_F: float
    p: int
    J: float
    B_f: float

    def __post_init__(self):
        for name in ("R_s", "L_d", "L_q", "Phi_F", "J", "B_f"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"MotorParams.{name} must be positive, got {v!r}")
        if int(self.p) != self.p or self.p < 1:
            raise ValueError("pole pairs p must be an integer >= 1")

    @property
    def surface_mount(self) -> bool:
        return abs(self.L_d - self.L_q) / self.L_d <= SURFACE_MOUNT_TOL

    @property
    def torque_constant(self) -> float:
        """``1.5 p Phi_F`` in N*m/A."""
        return 1.5 * self.p * self.Phi_F


@dataclass(frozen=True)
class MotorState:
    i_d: float = 0.0
    i_q: float = 0.0
    omega_m: float = 0.0

    def __post_init__(self):
        if not all(np.isfinite((self.i_d, self.i_q, self.omega_m))):
            raise ValueError("MotorState values must be finite")

    def omega_e(self, params: MotorParams) -> float:
        return params.p * self.omega_m

    def as_array(self) -> np.ndarray:
        return np.array([self.i_d, self.i_q, self.omega_m])


@dataclass(frozen=True)
class VoltagePair:
    v_d: float
    v_q: float
    frame: str  # "stator" | "auxiliary"

    def __post_init__(self):
        if self.frame not in ("stator", "auxiliary"):
            raise ValueError(f"unknown voltage frame {self.frame!r}")


@dataclass(frozen=True)
class TorqueSample:
    tau_e: float
    tau_l: float


def electrical_torque(state: MotorState, params: MotorParams) -> float:
    """Magnet plus reluctance torque."""
    k = 1.5 * params.p
    return k * params.Phi_F * state.i_q + k * (params.L_d - params.L_q) * state.i_d * state.i_q


@njit(cache=True)
def decouple(ud_aux, uq_aux, i_d, i_q, omega_m, L_d, L_q, Phi_F, p):
    """Auxiliary -> stator voltages (adds back the speed-dependent terms)."""
    we = p * omega_m
    return ud_aux - we * L_q * i_q, uq_aux + we * L_d * i_d + we * Phi_F


def auxiliary_from_stator(v: VoltagePair, state: MotorState, params: MotorParams) -> VoltagePair:
    if v.frame != "stator":
        raise ValueError("auxiliary_from_stator expects a stator-frame voltage")
    we = state.omega_e(params)
    return VoltagePair(v.v_d + we * params.L_q * state.i_q,
                       v.v_q - we * params.L_d * state.i_d - we * params.Phi_F, "auxiliary")


def stator_from_auxiliary(v: VoltagePair, state: MotorState, params: MotorParams) -> VoltagePair:
    if v.frame != "auxiliary":
        raise ValueError("stator_from_auxiliary expects an auxiliary-frame voltage")
    ud, uq = decouple(v.v_d, v.v_q, state.i_d, state.i_q, state.omega_m,
                      params.L_d, params.L_q, params.Phi_F, params.p)
    return VoltagePair(ud, uq, "stator")


@njit(cache=True)
def _rhs_stator(i_d, i_q, omega_m, u_d, u_q, tau_l, R_s, L_d, L_q, Phi_F, p, J, B_f):
    we = p * omega_m
    did = (u_d - R_s * i_d + we * L_q * i_q) / L_d
    diq = (u_q - R_s * i_q - we * L_d * i_d - we * Phi_F) / L_q
    tau_e = 1.5 * p * (Phi_F * i_q + (L_d - L_q) * i_d * i_q)
    dw = (tau_e - tau_l - B_f * omega_m) / J
    return did, diq, dw


def stator_derivative(state: MotorState, v: VoltagePair, tau_l: float,
                      params: MotorParams) -> np.ndarray:
    """Full bilinear dq model driven by stator voltages."""
    if v.frame != "stator":
        raise ValueError("stator_derivative expects a stator-frame voltage")
    return np.array(_rhs_stator(state.i_d, state.i_q, state.omega_m, v.v_d, v.v_q, tau_l,
                                params.R_s, params.L_d, params.L_q, params.Phi_F, params.p,
                                params.J, params.B_f))


def _require_surface_mount(params: MotorParams) -> None:
    if not params.surface_mount:
        raise ValueError("linear speed equation requires L_d == L_q (surface-mount PMSM)")


def state_derivative(state: MotorState, v_aux: VoltagePair, tau_l: float,
                     params: MotorParams) -> np.ndarray:
    """Linear dynamics in auxiliary inputs: ``d/dt [i_d, i_q, omega_m]``."""
    _require_surface_mount(params)
    if v_aux.frame != "auxiliary":
        raise ValueError("state_derivative expects an auxiliary-frame voltage")
    return np.array([
        (v_aux.v_d - params.R_s * state.i_d) / params.L_d,
        (v_aux.v_q - params.R_s * state.i_q) / params.L_q,
        (params.torque_constant * state.i_q - tau_l - params.B_f * state.omega_m) / params.J,
    ])


def linearize(params: MotorParams) -> StateSpaceModel:
    """Exact LTI model: states ``[i_d, i_q, omega_m]``, inputs ``[ud_aux, uq_aux, tau_l]``."""
    _require_surface_mount(params)
    R, Ld, Lq, J = params.R_s, params.L_d, params.L_q, params.J
    A = np.array([
        [-R / Ld, 0.0, 0.0],
        [0.0, -R / Lq, 0.0],
        [0.0, params.torque_constant / J, -params.B_f / J],
    ])
    B = np.array([
        [1.0 / Ld, 0.0, 0.0],
        [0.0, 1.0 / Lq, 0.0],
        [0.0, 0.0, -1.0 / J],
    ])
    return StateSpaceModel(A, B, np.eye(3), np.zeros((3, 3)),
                           input_labels=("ud_aux", "uq_aux", "tau_l"),
                           output_labels=("i_d", "i_q", "omega_m"))
