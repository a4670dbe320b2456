"""Drive-cycle ingestion and the road-load model that turns vehicle speed into
motor speed reference and shaft load torque."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from importlib import resources
from typing import Union

import numpy as np

GRAVITY = 9.81
KMH_PER_MPS = 3.6


class DriveCycleError(ValueError):
    def __init__(self, msg: str, row: int | None = None):
        super().__init__(f"row {row}: {msg}" if row is not None else msg)
        self.row = row


@dataclass(frozen=True)
class VehicleParams:
    mass: float = 1500.0  # kg
    wheel_radius: float = 0.3  # m
    gear_ratio: float = 10.0  # motor:wheel
    C_rr: float = 0.01
    rho_Cd_A: float = 0.75  # kg/m
    driveline_eff: float = 0.95

    def __post_init__(self):
        for name in ("mass", "wheel_radius", "gear_ratio", "C_rr", "rho_Cd_A"):
            if not getattr(self, name) > 0:
                raise ValueError(f"VehicleParams.{name} must be positive")
        if not 0 < self.driveline_eff <= 1:
            raise ValueError("driveline_eff must lie in (0, 1]")

    def rad_s_to_kmh(self, omega_m):
        """Motor shaft speed to vehicle speed."""
        return np.asarray(omega_m) * self.wheel_radius / self.gear_ratio * KMH_PER_MPS


@dataclass(frozen=True)
class DriveCycle:
    t: np.ndarray  # s
    v: np.ndarray  # km/h
    name: str = "custom"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise DriveCycleError("a drive cycle needs at least two (t, v) samples")
        if t[0] != 0:
            raise DriveCycleError("time must start at 0", row=1)
        bad = np.flatnonzero(np.diff(t) <= 0)
        if bad.size:
            raise DriveCycleError("time is not strictly increasing", row=int(bad[0]) + 2)
        neg = np.flatnonzero(v < 0)
        if neg.size:
            raise DriveCycleError("negative speed", row=int(neg[0]) + 1)
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)

    @property
    def duration(self) -> float:
        return float(self.t[-1])

    def _check_span(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0]) or np.any(t > self.t[-1]):
            raise ValueError(f"time outside drive cycle span [0, {self.duration}]")
        return t

    def speed_kmh(self, t):
        """Linearly interpolated speed."""
        return np.interp(self._check_span(t), self.t, self.v)

    def speed_mps(self, t):
        return self.speed_kmh(t) / KMH_PER_MPS

    def sample_acceleration(self) -> np.ndarray:
        """m/s^2 at the samples: central differences, one-sided at the ends."""
        v = self.v / KMH_PER_MPS
        a = np.empty_like(v)
        a[1:-1] = (v[2:] - v[:-2]) / (self.t[2:] - self.t[:-2])
        a[0] = (v[1] - v[0]) / (self.t[1] - self.t[0])
        a[-1] = (v[-1] - v[-2]) / (self.t[-1] - self.t[-2])
        return a

    def acceleration(self, t):
        return np.interp(self._check_span(t), self.t, self.sample_acceleration())


def _parse_rows(text: str):
    rows = []
    reader = csv.reader(io.StringIO(text))
    for lineno, rec in enumerate(reader, start=1):
        if not rec or all(not f.strip() for f in rec):
            continue
        if len(rec) != 2:
            raise DriveCycleError(f"expected 2 columns, found {len(rec)}", row=lineno)
        try:
            rows.append((lineno, float(rec[0]), float(rec[1])))
        except ValueError:
            if lineno == 1 and not rows:
                continue  # header
            raise DriveCycleError(f"cannot parse {rec!r} as numbers", row=lineno) from None
    return rows


def load_drive_cycle(source: Union[str, os.PathLike, io.TextIOBase], name: str | None = None) -> DriveCycle:
    """Read a two-column ``time s, speed km/h`` CSV (header optional).

    Errors name the offending file row.
    """
    if hasattr(source, "read"):
        text = source.read()
        name = name or "custom"
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
        name = name or os.path.splitext(os.path.basename(source))[0]
    rows = _parse_rows(text)
    if len(rows) < 2:
        raise DriveCycleError("a drive cycle needs at least two samples")
    if rows[0][1] != 0:
        raise DriveCycleError("time must start at 0", row=rows[0][0])
    for (_, t0, _), (ln, t1, _) in zip(rows, rows[1:]):
        if t1 <= t0:
            raise DriveCycleError(f"time {t1:g} does not increase (previous {t0:g})", row=ln)
    for ln, _, v in rows:
        if v < 0:
            raise DriveCycleError(f"negative speed {v:g}", row=ln)
    return DriveCycle(np.array([r[1] for r in rows]), np.array([r[2] for r in rows]), name)


def bundled_cycle_path(name: str = "wltc_class3b") -> str:
    return str(resources.files("reliable_drive") / "data" / f"{name}.csv")


def wltc_class3b() -> DriveCycle:
    """WLTC class 3b (1800 s), bundled with the package."""
    return load_drive_cycle(bundled_cycle_path("wltc_class3b"), name="WLTC class 3b")


def motor_speed_reference(cycle: DriveCycle, vp: VehicleParams, t):
    """Shaft speed in rad/s for the vehicle to follow the cycle at time ``t``."""
    return cycle.speed_mps(t) / vp.wheel_radius * vp.gear_ratio


def road_force(v_mps, a_mps2, vp: VehicleParams):
    """Inertial + rolling + aerodynamic force at the wheel (N). No grade."""
    v_mps = np.asarray(v_mps, dtype=float)
    rolling = np.where(v_mps > 0, vp.C_rr * vp.mass * GRAVITY, 0.0)
    return vp.mass * np.asarray(a_mps2) + rolling + 0.5 * vp.rho_Cd_A * v_mps**2


def load_torque(cycle: DriveCycle, vp: VehicleParams, t):
    """Load torque at the motor shaft (N*m); negative while braking."""
    F = road_force(cycle.speed_mps(t), cycle.acceleration(t), vp)
    return F * vp.wheel_radius / (vp.gear_ratio * vp.driveline_eff)
