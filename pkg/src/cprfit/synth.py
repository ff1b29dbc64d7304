"""Synthetic compression signals with known ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from .model import TWO_PI, SineParams, wrap_phase
from .signal import GRAVITY, ImuSample, Window

__all__ = [
    "SynthSpec",
    "synthesize",
    "synthesize_recording",
    "random_specs",
    "random_corpus",
    "cycle_events",
    "DEFAULT_NOISE_FRACTION",
]

DEFAULT_NOISE_FRACTION = 0.1


@dataclass(frozen=True)
class SynthSpec:
    """Description of one synthetic signal.

    ``noise_sigma=None`` selects 10% of the clean peak acceleration
    (``0.1 * A * omega**2``).
    """

    freq_hz: float
    amplitude_m: float
    phase: float = 0.0
    duration_s: float = 3.0
    rate_hz: float = 100.0
    noise_sigma: Optional[float] = None
    seed: Optional[int] = None

    @property
    def omega(self) -> float:
        return TWO_PI * self.freq_hz

    @property
    def peak_accel(self) -> float:
        return self.amplitude_m * self.omega**2

    @property
    def sigma(self) -> float:
        if self.noise_sigma is None:
            return DEFAULT_NOISE_FRACTION * self.peak_accel
        return self.noise_sigma

    @property
    def params(self) -> SineParams:
        return SineParams(self.amplitude_m, self.omega, wrap_phase(self.phase))

    @property
    def ccf(self) -> float:
        return 60.0 * self.freq_hz

    @property
    def ccd(self) -> float:
        return 200.0 * self.amplitude_m


def _signal(spec: SynthSpec) -> Tuple[np.ndarray, np.ndarray]:
    n = int(round(spec.duration_s * spec.rate_hz))
    t = np.arange(n) / spec.rate_hz
    clean = -spec.amplitude_m * spec.omega**2 * np.sin(spec.omega * t + spec.phase)
    if spec.sigma > 0:
        rng = np.random.default_rng(spec.seed)
        clean = clean + rng.normal(0.0, spec.sigma, n)
    return t, clean


def synthesize(spec: SynthSpec) -> Window:
    """Model signal plus Gaussian noise as a window starting at t=0."""
    _, s = _signal(spec)
    return Window(start_t=0.0, samples=s, rate=spec.rate_hz)


def synthesize_recording(spec: SynthSpec, gravity: float = GRAVITY) -> List[ImuSample]:
    """Tri-axial samples whose gravity-compensated magnitude is the signal.

    The signal rides on the z axis on top of gravity. Samples below
    ``-gravity`` cannot be represented by a magnitude and come back
    rectified after preprocessing.
    """
    t, s = _signal(spec)
    return [ImuSample(float(ti), 0.0, 0.0, float(si + gravity)) for ti, si in zip(t, s)]


def cycle_events(spec: SynthSpec) -> List[Tuple[float, float]]:
    """Boundaries of the complete compression cycles within the recording."""
    period = 1.0 / spec.freq_hz
    duration = int(round(spec.duration_s * spec.rate_hz)) / spec.rate_hz
    n = int(math.floor(duration / period + 1e-9))
    return [(k * period, (k + 1) * period) for k in range(n)]


def random_specs(
    n_freqs: int = 10,
    seed=None,
    noise_fraction: float = DEFAULT_NOISE_FRACTION,
    duration_s: float = 3.0,
    rate_hz: float = 100.0,
) -> List[SynthSpec]:
    """Random specs: frequency ~ U[1, 3] Hz, amplitude ~ U[0.01, 0.05] m,
    phase ~ U[0, 2pi); noise SD is ``noise_fraction`` of the clean peak."""
    if n_freqs < 1:
        raise ValueError("n_freqs must be >= 1")
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(n_freqs):
        f = rng.uniform(1.0, 3.0)
        a = rng.uniform(0.01, 0.05)
        ph = rng.uniform(0.0, TWO_PI)
        noise_seed = int(rng.integers(2**63))
        spec = SynthSpec(f, a, ph, duration_s, rate_hz, seed=noise_seed)
        specs.append(replace(spec, noise_sigma=noise_fraction * spec.peak_accel))
    return specs


def random_corpus(
    n_freqs: int = 10,
    seed=None,
    noise_fraction: float = DEFAULT_NOISE_FRACTION,
    duration_s: float = 3.0,
    rate_hz: float = 100.0,
) -> List[Tuple[Window, SynthSpec]]:
    """Labelled windows drawn as in :func:`random_specs`."""
    specs = random_specs(n_freqs, seed, noise_fraction, duration_s, rate_hz)
    return [(synthesize(s), s) for s in specs]
