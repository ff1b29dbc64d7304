"""Zero-padded DFT peak picking, used as the frequency-only baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoPeakError
from .signal import Window

__all__ = ["SpectralEstimate", "fft_ccf", "N_FFT", "BAND_HZ"]

N_FFT = 1000
BAND_HZ = (0.5, 3.5)  # 30..210 cpm


@dataclass(frozen=True)
class SpectralEstimate:
    ccf: float
    peak_bin: int
    peak_magnitude: float
    window_start_t: float
    window_len_s: float = 0.0


def fft_ccf(w: Window, n_fft: int = N_FFT, band=BAND_HZ) -> SpectralEstimate:
    """Dominant frequency of the mean-removed window, in cpm.

    The window is zero-padded to ``n_fft`` points and the magnitude peak is
    searched among bins whose frequency lies in ``band`` (inclusive). No
    taper and no inter-bin interpolation are applied, so the result is
    quantized to ``rate / n_fft * 60`` cpm.
    """
    x = np.asarray(w.samples, dtype=float)
    if len(x) > n_fft:
        raise ValueError(f"window has {len(x)} samples, more than n_fft={n_fft}")
    scale = float(np.max(np.abs(x))) if len(x) else 0.0
    x = x - x.mean()
    if len(x) == 0 or float(np.max(np.abs(x))) <= 1e-12 * scale or scale == 0.0:
        raise NoPeakError("window is constant; no spectral peak")
    mag = np.abs(np.fft.rfft(x, n=n_fft))
    freqs = np.arange(len(mag)) * w.rate / n_fft
    in_band = np.flatnonzero((freqs >= band[0]) & (freqs <= band[1]))
    if len(in_band) == 0:
        raise NoPeakError("no DFT bin inside the search band")
    peak = in_band[np.argmax(mag[in_band])]
    return SpectralEstimate(
        ccf=float(freqs[peak] * 60.0),
        peak_bin=int(peak),
        peak_magnitude=float(mag[peak]),
        window_start_t=w.start_t,
        window_len_s=w.duration,
    )
