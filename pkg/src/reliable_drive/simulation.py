"""Fixed-step closed-loop drive simulation and the damage analysis pipeline.

Per step: sample the reference and load torque, feed ``[e_track, i_d, i_q]``
to the discrete controller, add the decoupling terms to get stator voltages,
advance the full bilinear motor model with RK4, then update conduction loss
and junction temperature.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .control.hinf import ControllerRealization
from .drive_cycle import DriveCycle, VehicleParams, load_torque, motor_speed_reference
from .motor import MotorParams, _rhs_stator, decouple
from .rainflow import (CycleHistogram, bin_cycles, default_edges, extract_turning_points,
                       rainflow_count)
from .thermal import (LifetimeParams, LossParams, ThermalCycleBin, ThermalParams,
                      _conduction_loss, _step_tj, lifetime_projection, miner_damage)

LOG_SCHEMA = "reliable_drive.simlog/1"
LOG_COLUMNS = ("t", "omega_ref", "omega_m", "i_d", "i_q", "u_d", "u_q", "tau_l", "P_loss", "T_j")


class DivergenceError(ArithmeticError):
    def __init__(self, step: int):
        super().__init__(f"simulation diverged at step {step}")
        self.step = step


@dataclass(frozen=True)
class Scenario:
    motor: MotorParams
    vehicle: VehicleParams
    cycle: DriveCycle
    controller: ControllerRealization
    thermal: ThermalParams
    loss: LossParams
    dt: float = 1e-3
    log_decimation: int = 100
    voltage_limit: Optional[float] = None  # V, magnitude of (u_d, u_q)

    def __post_init__(self):
        if not 0 < self.dt <= 0.01:
            raise ValueError("dt must lie in (0, 0.01] s")
        if int(self.log_decimation) != self.log_decimation or self.log_decimation < 1:
            raise ValueError("log_decimation must be an integer >= 1")
        kd = self.controller.discrete.dt
        if kd is None or abs(kd - self.dt) > 1e-12 * self.dt:
            raise ValueError(f"controller dt {kd} does not match scenario dt {self.dt}")


@dataclass(frozen=True)
class SimulationLog:
    t: np.ndarray
    omega_ref: np.ndarray
    omega_m: np.ndarray
    i_d: np.ndarray
    i_q: np.ndarray
    u_d: np.ndarray
    u_q: np.ndarray
    tau_l: np.ndarray
    P_loss: np.ndarray
    T_j: np.ndarray
    dt: float
    log_decimation: int
    energy_loss: float = 0.0  # J, summed over every integration step
    peak_Tj: float = field(default=float("nan"))

    def __post_init__(self):
        n = len(self.t)
        if any(len(getattr(self, c)) != n for c in LOG_COLUMNS):
            raise ValueError("log columns must have equal length")

    def __len__(self) -> int:
        return len(self.t)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {LOG_SCHEMA} dt={self.dt!r} log_decimation={self.log_decimation} "
                  f"energy_loss={self.energy_loss!r} peak_Tj={self.peak_Tj!r}\n")
        buf.write(",".join(LOG_COLUMNS) + "\n")
        data = np.column_stack([getattr(self, c) for c in LOG_COLUMNS])
        np.savetxt(buf, data, delimiter=",", fmt="%.17g")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SimulationLog":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# " + LOG_SCHEMA):
            raise ValueError(f"not a {LOG_SCHEMA} file")
        meta = dict(kv.split("=", 1) for kv in lines[0][2 + len(LOG_SCHEMA):].split())
        header = lines[1].split(",")
        missing = [c for c in LOG_COLUMNS if c not in header]
        if missing:
            raise ValueError(f"log is missing columns: {', '.join(missing)}")
        data = np.loadtxt(io.StringIO("\n".join(lines[2:])), delimiter=",", ndmin=2)
        cols = {c: data[:, header.index(c)] for c in LOG_COLUMNS}
        return cls(**cols, dt=float(meta["dt"]), log_decimation=int(meta["log_decimation"]),
                   energy_loss=float(meta.get("energy_loss", "nan")),
                   peak_Tj=float(meta.get("peak_Tj", "nan")))

    def save_npz(self, path) -> None:
        np.savez_compressed(path, schema=LOG_SCHEMA, dt=self.dt, log_decimation=self.log_decimation,
                            energy_loss=self.energy_loss, peak_Tj=self.peak_Tj,
                            **{c: getattr(self, c) for c in LOG_COLUMNS})

    @classmethod
    def load_npz(cls, path) -> "SimulationLog":
        with np.load(path) as z:
            if str(z["schema"]) != LOG_SCHEMA:
                raise ValueError(f"not a {LOG_SCHEMA} file")
            return cls(**{c: z[c] for c in LOG_COLUMNS}, dt=float(z["dt"]),
                       log_decimation=int(z["log_decimation"]),
                       energy_loss=float(z["energy_loss"]), peak_Tj=float(z["peak_Tj"]))


@njit(cache=True)
def _stator_voltage(ua0, ua1, i_d, i_q, w, L_d, L_q, Phi_F, p, v_lim):
    u_d, u_q = decouple(ua0, ua1, i_d, i_q, w, L_d, L_q, Phi_F, p)
    mag = math.sqrt(u_d * u_d + u_q * u_q)
    if mag > v_lim:
        u_d *= v_lim / mag
        u_q *= v_lim / mag
    return u_d, u_q


@njit(cache=True)
def _rhs_closed(i_d, i_q, w, ua0, ua1, tl, R_s, L_d, L_q, Phi_F, p, J, B_f, v_lim):
    # The decoupling terms track the instantaneous state: the auxiliary voltage
    # is held over the step, the inverter-side compensation is not.
    u_d, u_q = _stator_voltage(ua0, ua1, i_d, i_q, w, L_d, L_q, Phi_F, p, v_lim)
    return _rhs_stator(i_d, i_q, w, u_d, u_q, tl, R_s, L_d, L_q, Phi_F, p, J, B_f)


@njit(cache=True)
def _run(n_steps, dt, dec, w_ref, tau, Ad, Bd, Cd, Dd,
         R_s, L_d, L_q, Phi_F, p, J, B_f,
         V_ce0, r_CE, duty, R_th, T_amb, decay, v_lim, out):
    nk = Ad.shape[0]
    xk = np.zeros(nk)
    xk_next = np.zeros(nk)
    y = np.zeros(3)
    i_d = 0.0
    i_q = 0.0
    w = 0.0
    T_j = T_amb
    energy = 0.0
    peak = T_amb
    row = 0
    h2 = 0.5 * dt
    for k in range(n_steps + 1):
        y[0] = w_ref[k] - w
        y[1] = i_d
        y[2] = i_q
        ua0 = Dd[0, 0] * y[0] + Dd[0, 1] * y[1] + Dd[0, 2] * y[2]
        ua1 = Dd[1, 0] * y[0] + Dd[1, 1] * y[1] + Dd[1, 2] * y[2]
        for a in range(nk):
            ua0 += Cd[0, a] * xk[a]
            ua1 += Cd[1, a] * xk[a]
        u_d, u_q = _stator_voltage(ua0, ua1, i_d, i_q, w, L_d, L_q, Phi_F, p, v_lim)
        i_on = math.sqrt(i_d * i_d + i_q * i_q)
        P = _conduction_loss(i_on, V_ce0, r_CE, duty)
        if T_j > peak:
            peak = T_j
        if k % dec == 0:
            out[row, 0] = k * dt
            out[row, 1] = w_ref[k]
            out[row, 2] = w
            out[row, 3] = i_d
            out[row, 4] = i_q
            out[row, 5] = u_d
            out[row, 6] = u_q
            out[row, 7] = tau[k]
            out[row, 8] = P
            out[row, 9] = T_j
            row += 1
        if k == n_steps:
            break
        energy += P * dt

        for a in range(nk):
            s = Bd[a, 0] * y[0] + Bd[a, 1] * y[1] + Bd[a, 2] * y[2]
            for b in range(nk):
                s += Ad[a, b] * xk[b]
            xk_next[a] = s
        for a in range(nk):
            xk[a] = xk_next[a]

        tl = tau[k]
        k1d, k1q, k1w = _rhs_closed(i_d, i_q, w, ua0, ua1, tl, R_s, L_d, L_q, Phi_F, p, J, B_f, v_lim)
        k2d, k2q, k2w = _rhs_closed(i_d + h2 * k1d, i_q + h2 * k1q, w + h2 * k1w, ua0, ua1, tl,
                                    R_s, L_d, L_q, Phi_F, p, J, B_f, v_lim)
        k3d, k3q, k3w = _rhs_closed(i_d + h2 * k2d, i_q + h2 * k2q, w + h2 * k2w, ua0, ua1, tl,
                                    R_s, L_d, L_q, Phi_F, p, J, B_f, v_lim)
        k4d, k4q, k4w = _rhs_closed(i_d + dt * k3d, i_q + dt * k3q, w + dt * k3w, ua0, ua1, tl,
                                    R_s, L_d, L_q, Phi_F, p, J, B_f, v_lim)
        i_d += dt / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        i_q += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        T_j = _step_tj(T_j, P, decay, R_th, T_amb)
        if not (math.isfinite(i_d) and math.isfinite(i_q) and math.isfinite(w)):
            return -(k + 1), energy, peak
    return row, energy, peak


def step_count(duration: float, dt: float) -> int:
    n = round(duration / dt)
    if abs(n * dt - duration) > 1e-9 * max(1.0, duration):
        n = math.floor(duration / dt)
    return int(n)


def run_closed_loop(sc: Scenario) -> SimulationLog:
    """Simulate the scenario from rest with ``T_j = T_ambient``."""
    n_steps = step_count(sc.cycle.duration, sc.dt)
    t = np.arange(n_steps + 1) * sc.dt
    t[-1] = min(t[-1], sc.cycle.duration)
    w_ref = np.ascontiguousarray(motor_speed_reference(sc.cycle, sc.vehicle, t), dtype=float)
    tau = np.ascontiguousarray(load_torque(sc.cycle, sc.vehicle, t), dtype=float)
    K = sc.controller.discrete
    dec = int(sc.log_decimation)
    n_rows = n_steps // dec + 1
    out = np.zeros((n_rows, len(LOG_COLUMNS)))
    m, th, ls = sc.motor, sc.thermal, sc.loss
    v_lim = math.inf if sc.voltage_limit is None else float(sc.voltage_limit)
    status, energy, peak = _run(
        n_steps, sc.dt, dec, w_ref, tau,
        np.ascontiguousarray(K.A), np.ascontiguousarray(K.B),
        np.ascontiguousarray(K.C), np.ascontiguousarray(K.D),
        m.R_s, m.L_d, m.L_q, m.Phi_F, float(m.p), m.J, m.B_f,
        ls.V_ce0, ls.r_CE, ls.duty, th.R_theta, th.T_ambient,
        math.exp(-sc.dt / th.time_constant), v_lim, out,
    )
    if status < 0:
        raise DivergenceError(-status - 1)
    cols = {c: out[:, i].copy() for i, c in enumerate(LOG_COLUMNS)}
    return SimulationLog(**cols, dt=sc.dt, log_decimation=dec, energy_loss=float(energy),
                         peak_Tj=float(peak))


def tracking_rmse(log: SimulationLog, vp: VehicleParams) -> float:
    """RMS speed tracking error expressed as vehicle speed in km/h."""
    if len(log) == 0:
        raise ValueError("empty simulation log")
    err = vp.rad_s_to_kmh(log.omega_ref - log.omega_m)
    return float(np.sqrt(np.mean(err**2)))


@dataclass(frozen=True)
class RainflowConfig:
    hysteresis: float = 0.5
    edges_dT: tuple = tuple(default_edges()[0])
    edges_ton: tuple = tuple(default_edges()[1])


@dataclass(frozen=True)
class DamageReport:
    histogram: CycleHistogram
    damage: float
    n_cycles: float
    drive_cycles_to_failure: float
    years: float
    cycles_per_day: float

    def to_dict(self) -> dict:
        def num(x):
            return x if math.isfinite(x) else None
        return {
            "damage_per_cycle": self.damage,
            "rainflow_cycles": self.n_cycles,
            "drive_cycles_to_failure": num(self.drive_cycles_to_failure),
            "years": num(self.years),
            "cycles_per_day": self.cycles_per_day,
        }


def histogram_bins(hist: CycleHistogram) -> list[ThermalCycleBin]:
    return [ThermalCycleBin(hist.mean_dT[i, j], hist.mean_Tj[i, j], hist.mean_ton[i, j],
                            hist.count[i, j]) for i, j in hist.nonempty()]


def analyze(log: SimulationLog, rf: RainflowConfig, lp: LifetimeParams,
            cycles_per_day: float = 2.0) -> DamageReport:
    """Rainflow the junction temperature and accumulate Miner damage."""
    tps = extract_turning_points(log.t, log.T_j, rf.hysteresis)
    cycles = rainflow_count(tps)
    hist = bin_cycles(cycles, rf.edges_dT, rf.edges_ton)
    D = miner_damage(histogram_bins(hist), lp)
    n_drive, years = lifetime_projection(D, cycles_per_day)
    return DamageReport(hist, D, hist.total, n_drive, years, cycles_per_day)
