"""IGBT conduction loss, junction temperature, cycles-to-failure and Miner damage."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np
from numba import njit

BOLTZMANN_EV = 8.617e-5  # eV/K
KELVIN = 273.15


@dataclass(frozen=True)
class LossParams:
    V_ce0: float  # V
    r_CE: float  # ohm
    duty: float = 0.5

    def __post_init__(self):
        if self.V_ce0 < 0 or not self.r_CE > 0 or not 0 < self.duty <= 1:
            raise ValueError("LossParams need V_ce0 >= 0, r_CE > 0, 0 < duty <= 1")


@dataclass(frozen=True)
class ThermalParams:
    R_theta: float  # K/W
    C_theta: float  # J/K
    T_ambient: float  # degC

    def __post_init__(self):
        if not (self.R_theta > 0 and self.C_theta > 0):
            raise ValueError("ThermalParams need R_theta > 0 and C_theta > 0")

    @property
    def time_constant(self) -> float:
        return self.R_theta * self.C_theta

    @property
    def bandwidth(self) -> float:
        """Thermal corner frequency ``1/(R C)`` in rad/s."""
        return 1.0 / self.time_constant


@dataclass(frozen=True)
class LifetimeParams:
    """Constants of the empirical power-cycling model (bond-wire lift-off)."""

    A0: float
    A1: float
    alpha: float
    T0: float  # K
    lam: float  # K
    Ea: float  # eV
    C_ton: float
    gamma_ton: float
    k_thick: float = 1.0
    kB: float = BOLTZMANN_EV

    def __post_init__(self):
        if self.kB != BOLTZMANN_EV:
            raise ValueError(f"kB is fixed at {BOLTZMANN_EV} eV/K")
        if not self.A0 > 0 or not self.lam > 0 or not self.A1 > 0:
            raise ValueError("LifetimeParams need A0 > 0, A1 > 0, lam > 0")
        values = (self.A0, self.A1, self.alpha, self.T0, self.lam, self.Ea,
                  self.C_ton, self.gamma_ton, self.k_thick)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("LifetimeParams must be finite")


@dataclass(frozen=True)
class ThermalCycleBin:
    delta_T: float  # K
    mean_Tj: float  # degC
    t_on: float  # s
    count: float

    def __post_init__(self):
        if not (self.delta_T > 0 and self.t_on > 0 and self.count > 0):
            raise ValueError("ThermalCycleBin needs delta_T, t_on and count > 0")


@njit(cache=True)
def _conduction_loss(i_on, V_ce0, r_CE, duty):
    return duty * (V_ce0 * i_on + r_CE * i_on * i_on)


@njit(cache=True)
def _step_tj(T_j, P, decay, R_theta, T_ambient):
    T_ss = T_ambient + P * R_theta
    return T_ss + (T_j - T_ss) * decay


def conduction_loss(i_on: float, lp: LossParams) -> float:
    """Average conduction loss ``duty * (V_ce0 i + r_CE i^2)`` in W."""
    if i_on < 0:
        raise ValueError("on-state current must be a non-negative magnitude")
    return _conduction_loss(float(i_on), lp.V_ce0, lp.r_CE, lp.duty)


def on_state_current(i_d: float, i_q: float) -> float:
    """Phase-current amplitude carried by the device (amplitude-invariant dq)."""
    return math.hypot(i_d, i_q)


def step_junction_temperature(T_j: float, P: float, dt: float, tp: ThermalParams) -> float:
    """Advance the first-order RC model by ``dt`` with ``P`` held constant (exact)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if P < 0:
        raise ValueError("dissipated power must be non-negative")
    return _step_tj(T_j, P, math.exp(-dt / tp.time_constant), tp.R_theta, tp.T_ambient)


def _log_cycles_to_failure(delta_T, mean_Tj, t_on, lp: LifetimeParams):
    beta = np.exp(-(delta_T - lp.T0) / lp.lam)
    T_K = mean_Tj + KELVIN
    ton_factor = (lp.C_ton + t_on**lp.gamma_ton) / (lp.C_ton + 2.0**lp.gamma_ton)
    return (math.log(lp.A0) + beta * math.log(lp.A1) + (lp.alpha - beta) * np.log(delta_T)
            + lp.Ea / (lp.kB * T_K) + np.log(ton_factor) + math.log(lp.k_thick))


def cycles_to_failure(delta_T: float, mean_Tj: float, t_on: float, lp: LifetimeParams) -> float:
    """Cycles to failure for one thermal cycle class.

    ``mean_Tj`` is in degC and converted to kelvin for the Arrhenius term.
    Evaluated in log space; a non-finite result raises ``OverflowError``.
    """
    if not delta_T > 0 or not t_on > 0:
        raise ValueError("delta_T and t_on must be positive")
    if not mean_Tj > -KELVIN:
        raise ValueError("mean junction temperature below absolute zero")
    if lp.k_thick <= 0:
        raise ValueError("k_thick must be positive")
    with np.errstate(over="ignore", invalid="ignore"):
        log_n = float(_log_cycles_to_failure(delta_T, mean_Tj, t_on, lp))
    if not math.isfinite(log_n) or log_n > 700:
        raise OverflowError("cycles to failure is not finite for these inputs")
    return math.exp(log_n)


def miner_damage(bins: Iterable[ThermalCycleBin], lp: LifetimeParams) -> float:
    """Palmgren-Miner sum ``sum(n_i / N_i)``; failure is conventionally ``D = 1``."""
    total = 0.0
    for b in bins:
        n_f = cycles_to_failure(b.delta_T, b.mean_Tj, b.t_on, lp)
        if not n_f > 0:
            raise ValueError("cycles to failure must be positive")
        total += b.count / n_f
    return float(total)


def lifetime_projection(D_per_cycle: float, cycles_per_day: float = 2.0) -> tuple[float, float]:
    """Drive cycles and years until ``D = 1``; zero damage gives ``(inf, inf)``."""
    if D_per_cycle < 0:
        raise ValueError("damage per cycle must be non-negative")
    if not cycles_per_day > 0:
        raise ValueError("cycles_per_day must be positive")
    if D_per_cycle == 0:
        return math.inf, math.inf
    cycles = 1.0 / D_per_cycle
    return cycles, cycles / (cycles_per_day * 365.0)


def calibrate_lifetime(base: LifetimeParams, anchor_a=(40.0, 150.0, 10.0, 922e3),
                       anchor_b=(80.0, 150.0, 10.0, 30e3)) -> LifetimeParams:
    """Fit ``alpha`` and ``A0`` so the model passes exactly through two anchors.

    Anchors are ``(delta_T K, mean_Tj degC, t_on s, N_f)``. The log of the
    model is affine in ``alpha`` and ``log A0``, so two points fix both.
    """
    (dTa, Ta, ta, Na), (dTb, Tb, tb, Nb) = anchor_a, anchor_b
    probe0 = replace(base, A0=1.0, alpha=0.0)
    la0 = _log_cycles_to_failure(dTa, Ta, ta, probe0)
    lb0 = _log_cycles_to_failure(dTb, Tb, tb, probe0)
    # log N = log A0 + alpha*log dT + rest
    alpha = ((math.log(Na) - la0) - (math.log(Nb) - lb0)) / (math.log(dTa) - math.log(dTb))
    log_A0 = math.log(Na) - la0 - alpha * math.log(dTa)
    return replace(base, A0=math.exp(log_A0), alpha=alpha)
