"""Toolkit configuration: a JSON tree whose leaves carry a value and a provenance tag.

Every default leaf looks like ``{"value": ..., "source": "paper" | "calibrated" |
"assumed"}``. A user file has the same layout but may list only the leaves it
changes, either annotated or as bare values (bare values are tagged
``assumed``). Unknown keys anywhere in the tree are rejected.
"""

from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass
from importlib import resources
from typing import Any, Optional

import numpy as np

from .control.hinf import MODES
from .drive_cycle import VehicleParams
from .motor import MotorParams
from .simulation import RainflowConfig
from .thermal import LifetimeParams, LossParams, ThermalParams

CONFIG_SCHEMA = "reliable_drive.config/1"
CONFIG_ENV = "RELIABLE_DRIVE_CONFIG"
SOURCES = ("paper", "calibrated", "assumed")

_INT_KEYS = {("motor", "p"), ("simulation", "log_decimation"), ("analysis", "ton_bins_per_decade")}
_NULLABLE = {("simulation", "voltage_limit"), ("paths", "cycle")}
_LIST_KEYS = {("lifetime", "anchor_a"), ("lifetime", "anchor_b")}
_STR_KEYS = {("paths", "cycle")}


class ConfigError(ValueError):
    pass


def _default_tree() -> dict:
    text = (resources.files("reliable_drive") / "data" / "default_config.json").read_text("utf-8")
    return json.loads(text)


def _is_leaf(node) -> bool:
    return isinstance(node, dict) and "value" in node


def _check_leaf(path: tuple, leaf: dict) -> None:
    where = ".".join(path)
    extra = set(leaf) - {"value", "source"}
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    if leaf.get("source") not in SOURCES:
        raise ConfigError(f"{where}: source must be one of {SOURCES}")
    key = path[-2:]
    v = leaf["value"]
    if v is None:
        if key not in _NULLABLE:
            raise ConfigError(f"{where}: value may not be null")
        return
    if key in _STR_KEYS:
        if not isinstance(v, str):
            raise ConfigError(f"{where}: expected a path string")
        return
    if key in _LIST_KEYS:
        if not (isinstance(v, list) and len(v) == 4
                and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
            raise ConfigError(f"{where}: expected [delta_T, mean_Tj, t_on, N_f]")
        return
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}: expected a finite number")
    if key in _INT_KEYS and int(v) != v:
        raise ConfigError(f"{where}: expected an integer")


def _merge(base: dict, override: dict, path: tuple = ()) -> None:
    for k, v in override.items():
        here = path + (k,)
        if k not in base:
            raise ConfigError(f"unknown config key {'.'.join(here)!r}")
        if _is_leaf(base[k]):
            leaf = dict(v) if _is_leaf(v) else {"value": v}
            leaf.setdefault("source", "assumed")
            _check_leaf(here, leaf)
            base[k] = leaf
        elif isinstance(v, dict):
            _merge(base[k], v, here)
        else:
            raise ConfigError(f"{'.'.join(here)}: expected a section, got {type(v).__name__}")


def _values(tree: dict) -> dict:
    return {k: (v["value"] if _is_leaf(v) else _values(v)) for k, v in tree.items()}


def _sources(tree: dict, path: tuple = ()) -> dict:
    out = {}
    for k, v in tree.items():
        if _is_leaf(v):
            out[".".join(path + (k,))] = v["source"]
        elif isinstance(v, dict):
            out.update(_sources(v, path + (k,)))
    return out


@dataclass(frozen=True)
class ModeWeights:
    tracking_corner: float
    tracking_dc_gain: float
    tracking_hf_gain: float
    current_lf_gain: float
    current_hf_gain: float


@dataclass(frozen=True)
class SynthesisSettings:
    eps_u: float
    eps_n: float
    gamma_min: float
    gamma_max: float
    tol: float
    backoff: float


@dataclass(frozen=True)
class SimulationSettings:
    dt: float
    log_decimation: int
    voltage_limit: Optional[float]


@dataclass(frozen=True)
class ToolkitConfig:
    motor: MotorParams
    vehicle: VehicleParams
    thermal: ThermalParams
    loss: LossParams
    lifetime: LifetimeParams
    weights: dict  # mode -> ModeWeights
    synthesis: SynthesisSettings
    simulation: SimulationSettings
    rainflow: RainflowConfig
    cycles_per_day: float
    cycle_path: Optional[str]
    anchors: tuple
    tree: dict  # the annotated tree this was built from

    @property
    def sources(self) -> dict:
        """Flat ``{"section.key": source}`` map."""
        return _sources(self.tree)

    def to_json(self) -> str:
        return json.dumps(self.tree, indent=2) + "\n"

    def with_overrides(self, override: dict) -> "ToolkitConfig":
        tree = copy.deepcopy(self.tree)
        _merge(tree, override)
        return from_tree(tree)


def _ton_edges(v: dict) -> np.ndarray:
    lo, hi, per = v["ton_min"], v["ton_max"], int(v["ton_bins_per_decade"])
    if not 0 < lo < hi or per < 1:
        raise ConfigError("analysis: need 0 < ton_min < ton_max and ton_bins_per_decade >= 1")
    n = int(round(math.log10(hi / lo) * per))
    return np.logspace(math.log10(lo), math.log10(hi), max(n, 1) + 1)


def _dT_edges(v: dict) -> np.ndarray:
    w, top = v["dT_bin_width"], v["dT_max"]
    if not 0 < w < top:
        raise ConfigError("analysis: need 0 < dT_bin_width < dT_max")
    return np.arange(0.0, top + 1e-9 * top, w)


def from_tree(tree: dict) -> ToolkitConfig:
    """Validate an annotated tree (same layout as the defaults) and build the config."""
    if tree.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(f"unsupported config schema {tree.get('schema')!r}")
    ref = _default_tree()
    body = {k: v for k, v in tree.items() if k != "schema"}
    full = copy.deepcopy(ref)
    _merge(full, body)

    def walk(node, ref_node, path=()):
        for k, r in ref_node.items():
            if k == "schema":
                continue
            if _is_leaf(r):
                _check_leaf(path + (k,), node[k])
            else:
                walk(node[k], r, path + (k,))
    walk(full, ref)

    v = _values({k: x for k, x in full.items() if k != "schema"})
    try:
        motor = MotorParams(**{**v["motor"], "p": int(v["motor"]["p"])})
        vehicle = VehicleParams(**v["vehicle"])
        thermal = ThermalParams(**v["thermal"])
        loss = LossParams(**v["loss"])
        lt = dict(v["lifetime"])
        anchors = (tuple(lt.pop("anchor_a")), tuple(lt.pop("anchor_b")))
        lifetime = LifetimeParams(**lt)
        weights = {m: ModeWeights(**v["weights"][m]) for m in MODES}
        synthesis = SynthesisSettings(**v["synthesis"])
        sim = v["simulation"]
        simulation = SimulationSettings(float(sim["dt"]), int(sim["log_decimation"]),
                                        None if sim["voltage_limit"] is None
                                        else float(sim["voltage_limit"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if not 0 < simulation.dt <= 0.01 or simulation.log_decimation < 1:
        raise ConfigError("simulation: need 0 < dt <= 0.01 and log_decimation >= 1")
    if not (0 < synthesis.gamma_min < synthesis.gamma_max and synthesis.tol > 0
            and synthesis.backoff >= 1 and synthesis.eps_u > 0 and synthesis.eps_n > 0):
        raise ConfigError("synthesis: invalid gamma bracket, tol, backoff or eps values")
    an = v["analysis"]
    if an["hysteresis"] < 0 or not an["cycles_per_day"] > 0:
        raise ConfigError("analysis: need hysteresis >= 0 and cycles_per_day > 0")
    rainflow = RainflowConfig(float(an["hysteresis"]), tuple(_dT_edges(an)), tuple(_ton_edges(an)))
    return ToolkitConfig(motor, vehicle, thermal, loss, lifetime, weights, synthesis, simulation,
                         rainflow, float(an["cycles_per_day"]), v["paths"]["cycle"], anchors, full)


def default_config() -> ToolkitConfig:
    return from_tree(_default_tree())


def load_config(path: Optional[str] = None) -> ToolkitConfig:
    """Defaults, overlaid with ``path`` or else the file named by ``$RELIABLE_DRIVE_CONFIG``.

    Raises ``OSError`` for unreadable files and ``ConfigError`` for invalid content.
    """
    path = path or os.environ.get(CONFIG_ENV) or None
    cfg = default_config()
    if path is None:
        return cfg
    with open(path, encoding="utf-8") as fh:
        try:
            user: Any = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(user, dict):
        raise ConfigError(f"{path}: top level must be an object")
    schema = user.pop("schema", CONFIG_SCHEMA)
    if schema != CONFIG_SCHEMA:
        raise ConfigError(f"{path}: unsupported config schema {schema!r}")
    return cfg.with_overrides(user)
