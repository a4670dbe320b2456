"""First-order frequency weights for tracking error and current."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statespace import StateSpaceModel, static_gain


@dataclass(frozen=True)
class TransferWeight:
    realization: StateSpaceModel
    kind: str  # "tracking" | "current"
    low_gain: float
    high_gain: float
    corner: float

    def magnitude(self, omega) -> np.ndarray:
        return np.abs(self.realization.freqresp(omega)[:, 0, 0])


def _lag(low: float, high: float, corner: float) -> StateSpaceModel:
    # W(s) = (high*s + low*corner) / (s + corner)
    return StateSpaceModel([[-corner]], [[1.0]], [[corner * (low - high)]], [[high]])


def make_tracking_weight(corner_freq: float, dc_gain: float, hf_gain: float) -> TransferWeight:
    """Lag weight on the speed error: ``dc_gain`` at DC rolling off to ``hf_gain``."""
    if not corner_freq > 0:
        raise ValueError("corner frequency must be positive")
    if not dc_gain > hf_gain > 0:
        raise ValueError("tracking weight needs dc_gain > hf_gain > 0")
    return TransferWeight(_lag(dc_gain, hf_gain, corner_freq), "tracking",
                          float(dc_gain), float(hf_gain), float(corner_freq))


def make_current_weight(thermal_bandwidth: float, lf_gain: float, hf_gain: float) -> TransferWeight:
    """Current weight, elevated below ``thermal_bandwidth`` (rad/s).

    Equal gains give a static weight with no states.
    """
    if not (lf_gain > 0 and hf_gain > 0):
        raise ValueError("current weight gains must be positive")
    if lf_gain < hf_gain:
        raise ValueError("current weight needs lf_gain >= hf_gain")
    if lf_gain == hf_gain:
        return TransferWeight(static_gain([[lf_gain]]), "current",
                              float(lf_gain), float(hf_gain), float(thermal_bandwidth))
    if not thermal_bandwidth > 0:
        raise ValueError("thermal bandwidth must be positive")
    return TransferWeight(_lag(lf_gain, hf_gain, thermal_bandwidth), "current",
                          float(lf_gain), float(hf_gain), float(thermal_bandwidth))
