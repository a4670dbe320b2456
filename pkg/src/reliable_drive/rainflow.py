"""Rainflow cycle extraction (ASTM E1049 three-point method) and histogram binning."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

HISTOGRAM_SCHEMA = "reliable_drive.histogram/1"


@dataclass(frozen=True)
class TurningPoint:
    t: float
    value: float


@dataclass(frozen=True)
class RainflowCycle:
    range: float
    mean: float
    count: float  # 0.5 or 1.0
    t_start: float
    t_end: float

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


def extract_turning_points(t: Sequence[float], values: Sequence[float],
                           hysteresis: float = 0.0) -> list[TurningPoint]:
    """Reversal points of a sampled series.

    Plateaus collapse onto their first sample. A reversal is kept only once
    the series has moved back by more than ``hysteresis``. The first and
    last samples are always kept.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size < 2 or t.shape != x.shape:
        raise ValueError("need at least two samples with matching time stamps")
    if np.any(np.diff(t) <= 0):
        raise ValueError("time stamps must be strictly increasing")
    if hysteresis < 0:
        raise ValueError("hysteresis must be non-negative")

    # candidate extrema: first sample of each plateau where the slope sign flips
    starts = np.concatenate(([0], np.flatnonzero(np.diff(x)) + 1))
    xs = x[starts]
    d = np.diff(xs)
    flips = np.flatnonzero(d[:-1] * d[1:] < 0) + 1
    cand = np.concatenate(([0], starts[flips], [x.size - 1]))
    cand = np.unique(cand)

    out_idx = [int(cand[0])]
    x0 = x[cand[0]]
    direction = 0
    ext = None
    for i in cand[1:]:
        v = x[i]
        if direction == 0:
            if abs(v - x0) > hysteresis:
                direction = 1 if v > x0 else -1
                ext = i
        elif direction > 0:
            if v >= x[ext]:
                if v > x[ext]:
                    ext = i
            elif x[ext] - v > hysteresis:
                out_idx.append(int(ext))
                direction, ext = -1, i
        else:
            if v <= x[ext]:
                if v < x[ext]:
                    ext = i
            elif v - x[ext] > hysteresis:
                out_idx.append(int(ext))
                direction, ext = 1, i
    if ext is not None:
        out_idx.append(int(ext))
    # a sub-hysteresis tail after the final extremum still ends the sequence
    last = x.size - 1
    if out_idx[-1] != last and x[last] != x[out_idx[-1]]:
        out_idx.append(last)
    return [TurningPoint(float(t[i]), float(x[i])) for i in out_idx]


def rainflow_count(tps: Sequence[TurningPoint]) -> list[RainflowCycle]:
    """Three-point rainflow count; residual ranges are counted as half cycles."""
    cycles: list[RainflowCycle] = []

    def emit(a: TurningPoint, b: TurningPoint, count: float):
        cycles.append(RainflowCycle(abs(b.value - a.value), 0.5 * (a.value + b.value),
                                    count, a.t, b.t))

    stack: list[TurningPoint] = []
    for tp in tps:
        stack.append(tp)
        while len(stack) >= 3:
            x_rng = abs(stack[-1].value - stack[-2].value)
            y_rng = abs(stack[-2].value - stack[-3].value)
            if x_rng < y_rng:
                break
            if len(stack) == 3:
                emit(stack[0], stack[1], 0.5)
                del stack[0]
            else:
                emit(stack[-3], stack[-2], 1.0)
                del stack[-3:-1]
    for a, b in zip(stack[:-1], stack[1:]):
        emit(a, b, 0.5)
    return [c for c in cycles if c.range > 0]


@dataclass(frozen=True)
class CycleHistogram:
    """Cycle counts over ``(delta_T, t_on)`` bins.

    Besides counts, each bin keeps the count-weighted mean temperature,
    range and duration of the cycles that fell into it; damage is evaluated
    at those means rather than at bin centres.
    """

    edges_dT: np.ndarray
    edges_ton: np.ndarray
    count: np.ndarray  # (n_dT, n_ton)
    mean_Tj: np.ndarray
    mean_dT: np.ndarray
    mean_ton: np.ndarray

    @property
    def total(self) -> float:
        return float(self.count.sum())

    def nonempty(self):
        """Yield ``(i, j)`` for bins with a positive count, in row-major order."""
        for i, j in zip(*np.nonzero(self.count > 0)):
            yield int(i), int(j)

    def to_rows(self) -> list[dict]:
        rows = []
        for i in range(self.count.shape[0]):
            for j in range(self.count.shape[1]):
                rows.append({
                    "dT_lo": float(self.edges_dT[i]), "dT_hi": float(self.edges_dT[i + 1]),
                    "ton_lo": float(self.edges_ton[j]), "ton_hi": float(self.edges_ton[j + 1]),
                    "mean_Tj": float(self.mean_Tj[i, j]), "count": float(self.count[i, j]),
                })
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["dT_lo", "dT_hi", "ton_lo", "ton_hi", "mean_Tj", "count"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in self.to_rows():
            w.writerow({k: repr(v) for k, v in row.items()})
        return buf.getvalue()

    def to_dict(self) -> dict:
        def clean(a):
            return [[None if not np.isfinite(v) else float(v) for v in r] for r in a]
        return {
            "schema": HISTOGRAM_SCHEMA,
            "edges_dT": self.edges_dT.tolist(),
            "edges_ton": self.edges_ton.tolist(),
            "count": self.count.tolist(),
            "mean_Tj": clean(self.mean_Tj),
            "mean_dT": clean(self.mean_dT),
            "mean_ton": clean(self.mean_ton),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "CycleHistogram":
        if d.get("schema") != HISTOGRAM_SCHEMA:
            raise ValueError(f"unsupported histogram schema {d.get('schema')!r}")

        def arr(a):
            return np.array([[np.nan if v is None else v for v in r] for r in a], dtype=float)
        return cls(np.asarray(d["edges_dT"], float), np.asarray(d["edges_ton"], float),
                   np.asarray(d["count"], float), arr(d["mean_Tj"]), arr(d["mean_dT"]),
                   arr(d["mean_ton"]))


def default_edges() -> tuple[np.ndarray, np.ndarray]:
    """2 K range bins over 0-60 K and four log-spaced duration bins per decade over 0.1-100 s."""
    return np.arange(0.0, 60.0 + 1e-9, 2.0), np.logspace(-1, 2, 13)


def _bin_index(x: np.ndarray, edges: np.ndarray) -> np.ndarray:
    return np.clip(np.searchsorted(edges, x, side="right") - 1, 0, edges.size - 2)


def bin_cycles(cycles: Sequence[RainflowCycle], edges_dT, edges_ton) -> CycleHistogram:
    """Half-open ``[lo, hi)`` binning; values outside the edges go to the end bins."""
    edges_dT = np.asarray(edges_dT, dtype=float)
    edges_ton = np.asarray(edges_ton, dtype=float)
    for e in (edges_dT, edges_ton):
        if e.ndim != 1 or e.size < 2:
            raise ValueError("each axis needs at least two edges")
        if np.any(np.diff(e) <= 0):
            raise ValueError("bin edges must be strictly increasing")
    shape = (edges_dT.size - 1, edges_ton.size - 1)
    count = np.zeros(shape)
    sums = np.zeros((3,) + shape)
    if cycles:
        rng = np.array([c.range for c in cycles])
        dur = np.array([c.duration for c in cycles])
        mean = np.array([c.mean for c in cycles])
        n = np.array([c.count for c in cycles])
        i = _bin_index(rng, edges_dT)
        j = _bin_index(dur, edges_ton)
        np.add.at(count, (i, j), n)
        for k, v in enumerate((mean, rng, dur)):
            np.add.at(sums[k], (i, j), n * v)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(count > 0, sums / np.where(count > 0, count, 1.0), np.nan)
    return CycleHistogram(edges_dT, edges_ton, count, means[0], means[1], means[2])
