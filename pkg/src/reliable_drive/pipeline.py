"""Glue from a ToolkitConfig to controllers, simulation logs and damage reports."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .config import ToolkitConfig
from .control import (ControllerRealization, GeneralizedPlant, build_generalized_plant,
                      make_current_weight, make_tracking_weight, synthesize, verify)
from .control.hinf import MODES
from .drive_cycle import DriveCycle, load_drive_cycle, wltc_class3b
from .motor import linearize
from .simulation import (DamageReport, Scenario, SimulationLog, analyze, run_closed_loop,
                         tracking_rmse)


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {', '.join(MODES)}; got {mode!r}")
    return mode


def generalized_plant(cfg: ToolkitConfig, mode: str) -> GeneralizedPlant:
    """Mixed-sensitivity plant for ``mode``; the current-weight corner is the thermal bandwidth."""
    w = cfg.weights[check_mode(mode)]
    W_e = make_tracking_weight(w.tracking_corner, w.tracking_dc_gain, w.tracking_hf_gain)
    W_I = make_current_weight(cfg.thermal.bandwidth, w.current_lf_gain, w.current_hf_gain)
    return build_generalized_plant(linearize(cfg.motor), W_e, W_I,
                                   eps_u=cfg.synthesis.eps_u, eps_n=cfg.synthesis.eps_n)


def synthesize_mode(cfg: ToolkitConfig, mode: str, dt: Optional[float] = None):
    """Returns ``(controller, spectral_abscissa, closed_loop_norm)``."""
    plant = generalized_plant(cfg, mode)
    s = cfg.synthesis
    K = synthesize(plant, (s.gamma_min, s.gamma_max), tol=s.tol,
                   dt=cfg.simulation.dt if dt is None else dt, mode_tag=mode, backoff=s.backoff)
    abscissa, norm = verify(plant, K)
    return K, abscissa, norm


def resolve_cycle(cfg: ToolkitConfig, path: Optional[str] = None) -> DriveCycle:
    """Explicit path, else the config's cycle path, else the bundled WLTC class 3b."""
    path = path or cfg.cycle_path
    return wltc_class3b() if path is None else load_drive_cycle(path)


def scenario(cfg: ToolkitConfig, controller: ControllerRealization, cycle: DriveCycle) -> Scenario:
    return Scenario(cfg.motor, cfg.vehicle, cycle, controller, cfg.thermal, cfg.loss,
                    dt=cfg.simulation.dt, log_decimation=cfg.simulation.log_decimation,
                    voltage_limit=cfg.simulation.voltage_limit)


def analyze_log(cfg: ToolkitConfig, log: SimulationLog) -> DamageReport:
    return analyze(log, cfg.rainflow, cfg.lifetime, cfg.cycles_per_day)


@dataclass(frozen=True)
class ModeResult:
    mode: str
    controller: ControllerRealization
    closed_loop_norm: float
    log: SimulationLog
    rmse_kmh: float
    report: DamageReport

    def row(self) -> dict:
        yrs = self.report.years
        return {
            "mode": self.mode,
            "gamma": self.controller.gamma_achieved,
            "rmse_kmh": self.rmse_kmh,
            "energy_loss_J": self.log.energy_loss,
            "peak_Tj_C": self.log.peak_Tj,
            "damage_per_cycle": self.report.damage,
            "years": yrs if math.isfinite(yrs) else None,
        }


def run_mode(cfg: ToolkitConfig, mode: str, cycle: DriveCycle) -> ModeResult:
    K, _, norm = synthesize_mode(cfg, mode)
    log = run_closed_loop(scenario(cfg, K, cycle))
    return ModeResult(mode, K, norm, log, tracking_rmse(log, cfg.vehicle), analyze_log(cfg, log))


def damage_reduction(perf: ModeResult, rel: ModeResult) -> float:
    """Fractional damage reduction of the reliability-aware mode (0.3 means 30 %)."""
    if perf.report.damage == 0:
        return math.nan
    return 1.0 - rel.report.damage / perf.report.damage


def compare(cfg: ToolkitConfig, cycle: DriveCycle) -> dict:
    """Both modes on one cycle, run one after the other."""
    return {m: run_mode(cfg, m, cycle) for m in MODES}
