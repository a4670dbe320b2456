"""Command-line entry point: ``reliable-drive {synthesize,simulate,analyze,compare,calibrate-lifetime}``.

Exit codes: 0 success, 1 I/O error, 2 usage or validation error, 3 numerical
failure (synthesis infeasible, simulation divergence).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

from .config import CONFIG_ENV, ToolkitConfig, load_config
from .control.hinf import MODES, ControllerRealization
from .pipeline import (analyze_log, check_mode, compare, damage_reduction, resolve_cycle,
                       run_closed_loop, scenario, synthesize_mode)
from .simulation import SimulationLog, tracking_rmse
from .thermal import calibrate_lifetime, cycles_to_failure

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
NORM_SLACK = 1.001
REPORT_SCHEMA = "reliable_drive.damage_report/1"
COMPARE_SCHEMA = "reliable_drive.comparison/1"


class UsageError(ValueError):
    pass


def _write(path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _fmt(x) -> str:
    return "inf" if x is None or (isinstance(x, float) and math.isinf(x)) else f"{x:.4g}"


def _save_log(log: SimulationLog, path: str) -> None:
    if str(path).endswith(".npz"):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        log.save_npz(path)
    else:
        _write(path, log.to_csv())


def _load_log(path: str) -> SimulationLog:
    if str(path).endswith(".npz"):
        return SimulationLog.load_npz(path)
    return SimulationLog.from_csv(_read(path))


def _report_dict(cfg: ToolkitConfig, rep, extra: dict | None = None) -> dict:
    d = {"schema": REPORT_SCHEMA}
    d.update(extra or {})
    d.update(rep.to_dict())
    d["histogram"] = rep.histogram.to_dict()
    return d


def _histogram_path(out: str) -> str:
    p = Path(out)
    return str(p.with_name(p.stem + "_histogram.csv"))


def cmd_synthesize(args, cfg: ToolkitConfig) -> int:
    mode = check_mode(args.mode)
    K, abscissa, norm = synthesize_mode(cfg, mode)
    ok = abscissa < 0 and norm <= K.gamma_achieved * NORM_SLACK
    _write(args.out, K.to_json())
    print(f"mode: {mode}")
    print(f"gamma_achieved: {K.gamma_achieved:.6g}")
    print(f"closed-loop spectral abscissa: {abscissa:.6g}")
    print(f"closed-loop H-inf norm: {norm:.6g} ({'<=' if ok else '>'} {NORM_SLACK}*gamma)")
    print(f"controller written to {args.out}")
    if not ok:
        print("error: closed-loop verification failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_simulate(args, cfg: ToolkitConfig) -> int:
    K = ControllerRealization.from_json(_read(args.controller))
    cycle = resolve_cycle(cfg, args.cycle)
    log = run_closed_loop(scenario(cfg, K, cycle))
    _save_log(log, args.out)
    print(f"mode: {K.mode_tag}")
    print(f"cycle: {cycle.name} ({cycle.duration:g} s)")
    print(f"RMSE: {tracking_rmse(log, cfg.vehicle):.6g} km/h")
    print(f"energy loss: {log.energy_loss:.6g} J")
    print(f"peak T_j: {log.peak_Tj:.6g} degC")
    print(f"log written to {args.out} ({len(log)} rows)")
    return EXIT_OK


def cmd_analyze(args, cfg: ToolkitConfig) -> int:
    log = _load_log(args.log)
    rep = analyze_log(cfg, log)
    _write(args.out, json.dumps(_report_dict(cfg, rep), indent=2) + "\n")
    hist_path = _histogram_path(args.out)
    _write(hist_path, rep.histogram.to_csv())
    print(f"damage per drive cycle: {rep.damage:.6g}")
    print(f"rainflow cycles: {rep.n_cycles:g}")
    print(f"drive cycles to failure: {_fmt(rep.drive_cycles_to_failure)}")
    print(f"years at {rep.cycles_per_day:g} cycles/day: {_fmt(rep.years)}")
    print(f"report written to {args.out}, histogram to {hist_path}")
    return EXIT_OK


def _table(rows: list[dict]) -> str:
    cols = ["mode", "rmse_kmh", "energy_loss_J", "peak_Tj_C", "damage_per_cycle", "years"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (r[k] if isinstance(r[k], str) else repr(r[k])) for k in cols})
    return buf.getvalue()


def cmd_compare(args, cfg: ToolkitConfig) -> int:
    cycle = resolve_cycle(cfg, args.cycle)
    res = compare(cfg, cycle)
    out = Path(args.out_dir)
    for mode, r in res.items():
        _write(out / f"{mode}_controller.json", r.controller.to_json())
        _write(out / f"{mode}_log.csv", r.log.to_csv())
        _write(out / f"{mode}_report.json",
               json.dumps(_report_dict(cfg, r.report, {"mode": mode}), indent=2) + "\n")
        _write(out / f"{mode}_histogram.csv", r.report.histogram.to_csv())
    perf, rel = res["performance_oriented"], res["reliability_aware"]
    red = damage_reduction(perf, rel)
    rows = [r.row() for r in res.values()]
    summary = {"schema": COMPARE_SCHEMA, "cycle": cycle.name, "modes": rows,
               "damage_reduction": red if math.isfinite(red) else None}
    _write(out / "comparison.json", json.dumps(summary, indent=2) + "\n")
    _write(out / "comparison.csv", _table(rows))

    print(f"cycle: {cycle.name} ({cycle.duration:g} s)")
    print(f"{'mode':<22}{'RMSE km/h':>11}{'E_loss J':>12}{'peak Tj':>9}{'D/cycle':>12}{'years':>9}")
    for r in rows:
        print(f"{r['mode']:<22}{r['rmse_kmh']:>11.4g}{r['energy_loss_J']:>12.5g}"
              f"{r['peak_Tj_C']:>9.4g}{r['damage_per_cycle']:>12.4g}{_fmt(r['years']):>9}")
    print(f"damage reduction: {100 * red:.1f} %")
    print(f"outputs written to {out}")
    return EXIT_OK


def cmd_calibrate_lifetime(args, cfg: ToolkitConfig) -> int:
    lp = calibrate_lifetime(cfg.lifetime, *cfg.anchors)
    out = {"A0": lp.A0, "alpha": float(lp.alpha)}
    for dT, Tm, ton, target in cfg.anchors:
        n = cycles_to_failure(dT, Tm, ton, lp)
        print(f"N_f({dT:g} K, {Tm:g} degC, {ton:g} s) = {n:.6g} (target {target:.6g})",
              file=sys.stderr)
    print(json.dumps({"lifetime": {k: {"value": v, "source": "calibrated"}
                                   for k, v in out.items()}}, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="reliable-drive",
        description="Speed-tracking vs IGBT-lifetime drive controller toolkit.",
        epilog=f"Without --config, the file named by ${CONFIG_ENV} (if set) overlays the defaults.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config overlay")

    s = sub.add_parser("synthesize", help="synthesize an H-infinity controller")
    s.add_argument("--mode", required=True, help=" or ".join(MODES))
    s.add_argument("--out", required=True)
    common(s)
    s.set_defaults(func=cmd_synthesize)

    s = sub.add_parser("simulate", help="run a closed-loop drive-cycle simulation")
    s.add_argument("--controller", required=True)
    s.add_argument("--cycle", help="two-column CSV (t_s, v_kmh); default: bundled WLTC class 3b")
    s.add_argument("--out", required=True, help="log file (.csv, or .npz for binary)")
    common(s)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("analyze", help="rainflow and Miner damage of a simulation log")
    s.add_argument("--log", required=True)
    s.add_argument("--out", required=True, help="report JSON; histogram CSV is written alongside")
    common(s)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("compare", help="full pipeline for both modes")
    s.add_argument("--cycle")
    s.add_argument("--out-dir", required=True)
    common(s)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("calibrate-lifetime", help="fit A0 and alpha to the lifetime anchors")
    common(s)
    s.set_defaults(func=cmd_calibrate_lifetime)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except ArithmeticError as exc:  # synthesis, Riccati, divergence, overflow
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        name = exc.filename or ""
        print(f"I/O error: {exc.strerror or exc}{': ' + os.fspath(name) if name else ''}",
              file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
