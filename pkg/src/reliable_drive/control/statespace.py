"""LTI state-space container and the small amount of algebra the toolkit needs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


def _as_matrix(M, rows: int, cols: int, name: str) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        M = np.zeros((rows, cols))
    if M.shape != (rows, cols):
        raise ValueError(f"{name} has shape {M.shape}, expected {(rows, cols)}")
    return M


@dataclass(frozen=True)
class StateSpaceModel:
    """Continuous (``dt is None``) or discrete LTI system ``(A, B, C, D)``.

    Matrices are stored as read-only float arrays. ``input_labels`` and
    ``output_labels`` name the channels; defaults are ``u0, u1, ...`` and
    ``y0, y1, ...``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    dt: Optional[float] = None
    input_labels: tuple = field(default=())
    output_labels: tuple = field(default=())

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        A = np.asarray(self.A, dtype=float)
        n = 0 if A.size == 0 else A.shape[0]
        p, m = D.shape
        A = _as_matrix(self.A, n, n, "A")
        B = _as_matrix(self.B, n, m, "B")
        C = _as_matrix(self.C, p, n, "C")
        for M in (A, B, C, D):
            M.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

        if self.dt is not None and not self.dt > 0:
            raise ValueError("discrete systems need dt > 0")
        in_labels = tuple(self.input_labels) or tuple(f"u{i}" for i in range(m))
        out_labels = tuple(self.output_labels) or tuple(f"y{i}" for i in range(p))
        if len(in_labels) != m or len(out_labels) != p:
            raise ValueError("label count does not match system dimensions")
        if len(set(in_labels)) != m or len(set(out_labels)) != p:
            raise ValueError("channel labels must be unique")
        object.__setattr__(self, "input_labels", in_labels)
        object.__setattr__(self, "output_labels", out_labels)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.D.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.D.shape[0]

    @property
    def is_discrete(self) -> bool:
        return self.dt is not None

    def poles(self) -> np.ndarray:
        return np.linalg.eigvals(self.A) if self.n_states else np.zeros(0)

    def is_stable(self, margin: float = 0.0) -> bool:
        """Asymptotic stability: open left half-plane, or open unit disc if discrete."""
        poles = self.poles()
        if poles.size == 0:
            return True
        if self.is_discrete:
            return bool(np.max(np.abs(poles)) < 1.0 - margin)
        return bool(np.max(poles.real) < -margin)

    def evaluate(self, s: complex) -> np.ndarray:
        """Transfer matrix ``C (sI - A)^-1 B + D`` at a single complex point."""
        if self.n_states == 0:
            return self.D.astype(complex)
        n = self.n_states
        return self.C @ np.linalg.solve(s * np.eye(n) - self.A, self.B) + self.D

    def freqresp(self, omega: Sequence[float]) -> np.ndarray:
        """Frequency response, shape ``(len(omega), p, m)``.

        For discrete systems ``omega`` is in rad/s and mapped through ``exp(j omega dt)``.
        """
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        if self.is_discrete:
            pts = np.exp(1j * omega * self.dt)
        else:
            pts = 1j * omega
        return np.stack([self.evaluate(s) for s in pts])

    def dcgain(self) -> np.ndarray:
        return np.real(self.evaluate(1.0 if self.is_discrete else 0.0))

    def select(self, outputs=None, inputs=None) -> "StateSpaceModel":
        """Sub-system restricted to the given output/input indices (or labels)."""
        out_idx = self._indices(outputs, self.output_labels)
        in_idx = self._indices(inputs, self.input_labels)
        return StateSpaceModel(
            self.A,
            self.B[:, in_idx],
            self.C[out_idx, :],
            self.D[np.ix_(out_idx, in_idx)],
            dt=self.dt,
            input_labels=tuple(self.input_labels[i] for i in in_idx),
            output_labels=tuple(self.output_labels[i] for i in out_idx),
        )

    @staticmethod
    def _indices(sel, labels) -> list:
        if sel is None:
            return list(range(len(labels)))
        return [labels.index(s) if isinstance(s, str) else int(s) for s in sel]

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
            "dt": self.dt,
            "input_labels": list(self.input_labels),
            "output_labels": list(self.output_labels),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StateSpaceModel":
        n = len(d["A"])
        p, m = np.asarray(d["D"], dtype=float).reshape(len(d["D"]), -1).shape
        return cls(
            np.asarray(d["A"], dtype=float).reshape(n, n),
            np.asarray(d["B"], dtype=float).reshape(n, m),
            np.asarray(d["C"], dtype=float).reshape(p, n),
            np.asarray(d["D"], dtype=float).reshape(p, m),
            dt=d.get("dt"),
            input_labels=tuple(d.get("input_labels", ())),
            output_labels=tuple(d.get("output_labels", ())),
        )


def static_gain(D, input_labels=(), output_labels=()) -> StateSpaceModel:
    D = np.atleast_2d(np.asarray(D, dtype=float))
    return StateSpaceModel(
        np.zeros((0, 0)), np.zeros((0, D.shape[1])), np.zeros((D.shape[0], 0)), D,
        input_labels=input_labels, output_labels=output_labels,
    )


def discretize(sys: StateSpaceModel, dt: float) -> StateSpaceModel:
    """Bilinear (Tustin) discretization.

    DC gain is preserved exactly and left-half-plane poles map inside the
    unit disc. Raises ``ValueError`` if ``I - A dt/2`` is singular.
    """
    if sys.is_discrete:
        raise ValueError("system is already discrete")
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = sys.n_states
    if n == 0:
        return StateSpaceModel(sys.A, sys.B, sys.C, sys.D, dt=dt,
                               input_labels=sys.input_labels, output_labels=sys.output_labels)
    half = 0.5 * dt
    M = np.eye(n) - half * sys.A
    if np.min(np.abs(1.0 - half * sys.poles())) < 1e-9:
        raise ValueError("I - A*dt/2 is singular; choose a different dt")
    Ad = np.linalg.solve(M, np.eye(n) + half * sys.A)
    Bd = np.linalg.solve(M, sys.B * dt)
    Cd = np.linalg.solve(M.T, sys.C.T).T
    Dd = sys.D + 0.5 * sys.C @ Bd
    return StateSpaceModel(Ad, Bd, Cd, Dd, dt=dt,
                           input_labels=sys.input_labels, output_labels=sys.output_labels)
