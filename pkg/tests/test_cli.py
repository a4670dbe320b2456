import json
import subprocess
import sys

import numpy as np
import pytest

from reliable_drive import cli
from reliable_drive.control.hinf import ControllerRealization
from reliable_drive.simulation import SimulationLog


@pytest.fixture
def short_cycle(tmp_path):
    p = tmp_path / "short.csv"
    p.write_text("t_s,v_kmh\n0,0\n5,20\n10,20\n15,0\n20,0\n25,30\n30,0\n")
    return str(p)


def run(*argv):
    return cli.main(list(argv))


def test_synthesize_is_byte_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("synthesize", "--mode", "performance_oriented", "--out", str(a)) == 0
    assert run("synthesize", "--mode", "performance_oriented", "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()
    out = capsys.readouterr().out
    assert "gamma_achieved" in out and "spectral abscissa" in out
    K = ControllerRealization.from_json(a.read_text())
    assert K.mode_tag == "performance_oriented" and K.discrete.dt == 1e-3


def test_simulate_and_analyze(tmp_path, short_cycle, capsys):
    k, log, rep = tmp_path / "k.json", tmp_path / "log.csv", tmp_path / "rep.json"
    assert run("synthesize", "--mode", "reliability_aware", "--out", str(k)) == 0
    assert run("simulate", "--controller", str(k), "--cycle", short_cycle, "--out", str(log)) == 0
    parsed = SimulationLog.from_csv(log.read_text())
    assert len(parsed) == 301
    assert run("analyze", "--log", str(log), "--out", str(rep)) == 0
    d = json.loads(rep.read_text())
    assert d["schema"] == cli.REPORT_SCHEMA
    assert d["damage_per_cycle"] >= 0
    hist = (tmp_path / "rep_histogram.csv").read_text().splitlines()
    assert hist[0].startswith("dT_lo,")
    npz = tmp_path / "log.npz"
    assert run("simulate", "--controller", str(k), "--cycle", short_cycle, "--out", str(npz)) == 0
    np.testing.assert_array_equal(SimulationLog.load_npz(npz).T_j, parsed.T_j)
    assert "RMSE" in capsys.readouterr().out


def test_compare_outputs(tmp_path, short_cycle, capsys):
    out = tmp_path / "cmp"
    assert run("compare", "--cycle", short_cycle, "--out-dir", str(out)) == 0
    for mode in ("performance_oriented", "reliability_aware"):
        for suffix in ("controller.json", "log.csv", "report.json", "histogram.csv"):
            assert (out / f"{mode}_{suffix}").is_file()
    summary = json.loads((out / "comparison.json").read_text())
    assert summary["schema"] == cli.COMPARE_SCHEMA
    assert [r["mode"] for r in summary["modes"]] == ["performance_oriented", "reliability_aware"]
    rows = (out / "comparison.csv").read_text().splitlines()
    assert rows[0] == "mode,rmse_kmh,energy_loss_J,peak_Tj_C,damage_per_cycle,years"
    assert len(rows) == 3
    assert "damage reduction" in capsys.readouterr().out


def test_calibrate_lifetime(cfg, capsys):
    assert run("calibrate-lifetime") == 0
    captured = capsys.readouterr()
    d = json.loads(captured.out)["lifetime"]
    assert d["A0"]["value"] == pytest.approx(cfg.lifetime.A0, rel=1e-12)
    assert d["alpha"]["value"] == pytest.approx(cfg.lifetime.alpha, rel=1e-12)
    assert "target 922000" in captured.err


def test_exit_code_io(tmp_path):
    assert run("simulate", "--controller", str(tmp_path / "missing.json"),
               "--out", str(tmp_path / "x.csv")) == 1
    assert run("analyze", "--log", str(tmp_path / "missing.csv"),
               "--out", str(tmp_path / "r.json")) == 1


def test_exit_code_usage(tmp_path, short_cycle):
    assert run("synthesize", "--mode", "fastest", "--out", str(tmp_path / "k.json")) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("0,0\n1,-5\n")
    k = tmp_path / "k.json"
    run("synthesize", "--mode", "performance_oriented", "--out", str(k))
    assert run("simulate", "--controller", str(k), "--cycle", str(bad),
               "--out", str(tmp_path / "x.csv")) == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"motor": {"bogus": 1}}')
    assert run("calibrate-lifetime", "--config", str(cfg)) == 2
    with pytest.raises(SystemExit) as e:
        run("synthesize")
    assert e.value.code == 2


def test_exit_code_numerical(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"synthesis": {"gamma_min": 1e-3, "gamma_max": 1e-2}}))
    assert run("synthesize", "--mode", "performance_oriented", "--out", str(tmp_path / "k.json"),
               "--config", str(cfg)) == 3


def test_console_script_help():
    r = subprocess.run([sys.executable, "-m", "reliable_drive.cli", "--help"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    for sub in ("synthesize", "simulate", "analyze", "compare", "calibrate-lifetime"):
        assert sub in r.stdout


def test_missing_cycle_names_the_path(tmp_path, capsys):
    k = tmp_path / "k.json"
    assert run("synthesize", "--mode", "performance_oriented", "--out", str(k)) == 0
    missing = tmp_path / "no_such_cycle.csv"
    assert run("simulate", "--controller", str(k), "--cycle", str(missing),
               "--out", str(tmp_path / "x.csv")) == 1
    assert str(missing) in capsys.readouterr().err
