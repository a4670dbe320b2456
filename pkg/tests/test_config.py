import json

import pytest

from reliable_drive.config import (CONFIG_ENV, SOURCES, ConfigError, default_config, from_tree,
                                   load_config)


def write(tmp_path, obj, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


def test_every_leaf_is_tagged(cfg):
    src = cfg.sources
    assert src and set(src.values()) <= set(SOURCES)
    assert src["lifetime.anchor_a"] == "paper"
    assert src["motor.J"] == "calibrated"


def test_defaults_round_trip(cfg):
    again = from_tree(json.loads(cfg.to_json()))
    assert again.to_json() == cfg.to_json()
    assert again.motor == cfg.motor


def test_partial_overlay_with_bare_values(tmp_path):
    cfg = load_config(write(tmp_path, {"motor": {"R_s": 0.05}, "analysis": {"hysteresis": 1.0}}))
    assert cfg.motor.R_s == 0.05
    assert cfg.rainflow.hysteresis == 1.0
    assert cfg.sources["motor.R_s"] == "assumed"
    assert cfg.motor.L_d == default_config().motor.L_d


def test_annotated_overlay_keeps_source(tmp_path):
    cfg = load_config(write(tmp_path, {"thermal": {"R_theta": {"value": 0.5,
                                                               "source": "calibrated"}}}))
    assert cfg.thermal.R_theta == 0.5 and cfg.sources["thermal.R_theta"] == "calibrated"


@pytest.mark.parametrize("bad", [
    {"motor": {"R_z": 1.0}},
    {"nonsense": {}},
    {"motor": {"R_s": {"value": 1.0, "source": "folklore"}}},
    {"motor": {"R_s": {"value": 1.0, "units": "ohm"}}},
    {"motor": {"R_s": "high"}},
    {"motor": {"R_s": None}},
    {"motor": {"R_s": True}},
    {"motor": {"p": 2.5}},
    {"motor": 3},
    {"lifetime": {"anchor_a": [40, 150, 10]}},
    {"simulation": {"dt": 0.1}},
    {"synthesis": {"gamma_min": 10.0, "gamma_max": 1.0}},
    {"synthesis": {"backoff": 0.9}},
    {"analysis": {"ton_min": 0.0}},
    {"motor": {"R_s": -1.0}},
    {"schema": "reliable_drive.config/0"},
])
def test_invalid_overlays_rejected(tmp_path, bad):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, bad))


def test_invalid_json(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "{not json"))
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, [1, 2]))


def test_missing_file_is_os_error():
    with pytest.raises(OSError):
        load_config("/nonexistent/config.json")


def test_environment_variable(tmp_path, monkeypatch):
    p = write(tmp_path, {"analysis": {"cycles_per_day": 3}})
    monkeypatch.setenv(CONFIG_ENV, p)
    assert load_config().cycles_per_day == 3.0
    other = write(tmp_path, {"analysis": {"cycles_per_day": 5}}, "d.json")
    assert load_config(other).cycles_per_day == 5.0  # explicit path wins


def test_with_overrides_is_pure(cfg):
    new = cfg.with_overrides({"simulation": {"dt": 5e-4}})
    assert new.simulation.dt == 5e-4 and cfg.simulation.dt == 1e-3


def test_edges(cfg):
    dT, ton = cfg.rainflow.edges_dT, cfg.rainflow.edges_ton
    assert len(dT) == 31 and dT[-1] == pytest.approx(60)
    assert len(ton) == 13 and ton[0] == pytest.approx(0.1) and ton[-1] == pytest.approx(100)
