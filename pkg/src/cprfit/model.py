"""Second-derivative sine model, RMSE loss and conversion to CPR metrics.

Amplitudes are stored in meters so that the model output is in m/s^2 and
can be compared directly with gravity-compensated accelerometer data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyWindowError
from .signal import Window

__all__ = [
    "SineParams",
    "CprEstimate",
    "model_accel",
    "model_accel_batch",
    "rmse_loss",
    "rmse_batch",
    "to_estimate",
    "wrap_phase",
]

TWO_PI = 2.0 * math.pi


def wrap_phase(rho: float) -> float:
    """Map an angle onto [0, 2pi)."""
    r = float(rho) % TWO_PI
    return 0.0 if r >= TWO_PI else r


@dataclass(frozen=True)
class SineParams:
    """Amplitude ``A`` [m], angular frequency ``omega`` [rad/s], phase ``rho`` [rad]."""

    A: float
    omega: float
    rho: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.A, self.omega, self.rho)):
            raise ValueError(f"non-finite parameters {self!r}")
        if self.A <= 0 or self.omega <= 0:
            raise ValueError(f"A and omega must be positive, got {self!r}")
        if not 0.0 <= self.rho < TWO_PI:
            raise ValueError(f"rho must lie in [0, 2pi), got {self.rho!r}")

    @classmethod
    def from_array(cls, x) -> "SineParams":
        return cls(float(x[0]), float(x[1]), wrap_phase(x[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.omega, self.rho])

    @property
    def freq_hz(self) -> float:
        return self.omega / TWO_PI


@dataclass(frozen=True)
class CprEstimate:
    ccf: float  # compressions per minute
    ccd: float  # centimeters
    loss: float  # RMSE, m/s^2
    window_start_t: float
    window_len_s: float
    generations: int = 0
    params: Optional[SineParams] = None


def model_accel(p: SineParams, t):
    """Evaluate ``-A * omega**2 * sin(omega * t + rho)``; ``t`` may be an array."""
    return -p.A * p.omega**2 * np.sin(p.omega * np.asarray(t) + p.rho)


def model_accel_batch(params: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Model output for a ``(n, 3)`` parameter array, shape ``(n, len(t))``."""
    A = params[:, 0:1]
    w = params[:, 1:2]
    rho = params[:, 2:3]
    return -A * w * w * np.sin(w * t[None, :] + rho)


def rmse_batch(params: np.ndarray, samples: np.ndarray, t: np.ndarray) -> np.ndarray:
    resid = samples[None, :] - model_accel_batch(params, t)
    return np.sqrt(np.mean(resid * resid, axis=1))


def rmse_loss(p: SineParams, w: Window) -> float:
    """Root mean squared error between the window and the model, in m/s^2."""
    if len(w) == 0:
        raise EmptyWindowError("cannot compute a loss on an empty window")
    return float(rmse_batch(p.as_array()[None, :], w.samples, w.times)[0])


def to_estimate(
    p: SineParams,
    loss: float,
    window_start_t: float = 0.0,
    window_len_s: float = 0.0,
    generations: int = 0,
) -> CprEstimate:
    """Map model parameters to compression frequency (cpm) and depth (cm)."""
    return CprEstimate(
        ccf=p.omega / TWO_PI * 60.0,
        ccd=2.0 * p.A * 100.0,
        loss=float(loss),
        window_start_t=window_start_t,
        window_len_s=window_len_s,
        generations=generations,
        params=p,
    )
