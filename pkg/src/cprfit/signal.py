"""Accelerometer preprocessing: gravity-compensated magnitude and windowing."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

import numpy as np

from .errors import InvalidSampleError, RateMismatchError

__all__ = [
    "GRAVITY",
    "ImuSample",
    "Window",
    "StreamConfig",
    "total_acceleration",
    "windows",
    "read_recording",
    "write_recording",
]

GRAVITY = 9.81
RATE_TOLERANCE = 0.05


@dataclass(frozen=True)
class ImuSample:
    t: float
    ax: float
    ay: float
    az: float


@dataclass(frozen=True)
class StreamConfig:
    """Windowing parameters.

    Parameters
    ----------
    window_len_s : float
        Length of each fitted window in seconds.
    update_period_s : float
        Hop between consecutive window starts; windows overlap by
        ``window_len_s - update_period_s``.
    rate_hz : float
        Nominal sampling rate.
    gravity : float
        Constant subtracted from the acceleration magnitude.
    """

    window_len_s: float = 3.0
    update_period_s: float = 1.0
    rate_hz: float = 100.0
    gravity: float = GRAVITY

    def __post_init__(self):
        if not (self.update_period_s > 0 and self.window_len_s >= self.update_period_s):
            raise ValueError("need window_len_s >= update_period_s > 0")
        if not self.rate_hz > 0:
            raise ValueError("rate_hz must be positive")

    @property
    def window_samples(self) -> int:
        return int(round(self.window_len_s * self.rate_hz))

    @property
    def hop_samples(self) -> int:
        return int(round(self.update_period_s * self.rate_hz))


@dataclass(frozen=True)
class Window:
    """A slice of one-dimensional acceleration, ``samples[i]`` taken at
    ``start_t + i / rate``. The sample buffer is read-only."""

    start_t: float
    samples: np.ndarray
    rate: float = 100.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        arr = np.array(self.samples, dtype=float)  # always a private copy
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.rate

    @property
    def times(self) -> np.ndarray:
        """Window-relative sample times, starting at 0."""
        return np.arange(len(self.samples)) / self.rate


def total_acceleration(sample: ImuSample, gravity: float = GRAVITY) -> float:
    """Euclidean norm of the three axes minus gravity (may be negative)."""
    ax, ay, az = sample.ax, sample.ay, sample.az
    if not all(math.isfinite(v) for v in (sample.t, ax, ay, az)):
        raise InvalidSampleError(f"non-finite sample {sample!r}")
    return math.sqrt(ax * ax + ay * ay + az * az) - gravity


def _check_rate(times: np.ndarray, rate_hz: float) -> None:
    if len(times) < 2:
        return
    dt = float(np.median(np.diff(times)))
    nominal = 1.0 / rate_hz
    if abs(dt - nominal) >= RATE_TOLERANCE * nominal:
        raise RateMismatchError(
            f"median sample interval {dt:.6g}s deviates from 1/{rate_hz:g}s by >= 5%"
        )


def windows(stream: Iterable[ImuSample], cfg: StreamConfig = StreamConfig()) -> Iterator[Window]:
    """Yield overlapping windows of total acceleration.

    Consumes ``stream`` lazily: a window is yielded as soon as its last
    sample has been read, so this works on live or file-backed streams.
    Trailing data shorter than one window is dropped.
    """
    n = cfg.window_samples
    hop = cfg.hop_samples
    buf_t: list[float] = []
    buf_a: list[float] = []
    last_t = -math.inf
    for s in stream:
        a = total_acceleration(s, cfg.gravity)
        if not s.t > last_t:
            raise InvalidSampleError(f"timestamps must strictly increase (t={s.t!r} after {last_t!r})")
        last_t = s.t
        buf_t.append(s.t)
        buf_a.append(a)
        if len(buf_a) == n:
            times = np.asarray(buf_t)
            _check_rate(times, cfg.rate_hz)
            yield Window(start_t=buf_t[0], samples=np.asarray(buf_a), rate=cfg.rate_hz)
            del buf_t[:hop]
            del buf_a[:hop]


def read_recording(fh: TextIO) -> Iterator[ImuSample]:
    """Parse the ``t,ax,ay,az`` CSV format lazily.

    Lines starting with ``#`` are skipped. Malformed rows raise
    :class:`InvalidSampleError` naming the line number.
    """
    header = None
    for lineno, line in enumerate(fh, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        row = next(csv.reader([stripped]))
        if header is None:
            header = [c.strip() for c in row]
            if header != ["t", "ax", "ay", "az"]:
                raise InvalidSampleError(f"line {lineno}: expected header t,ax,ay,az, got {stripped!r}")
            continue
        try:
            t, ax, ay, az = (float(c) for c in row)
        except ValueError:
            raise InvalidSampleError(f"line {lineno}: malformed row {stripped!r}") from None
        if not all(math.isfinite(v) for v in (t, ax, ay, az)):
            raise InvalidSampleError(f"line {lineno}: non-finite value in {stripped!r}")
        yield ImuSample(t, ax, ay, az)


def write_recording(fh: TextIO, samples: Iterable[ImuSample], comments: Iterable[str] = ()) -> None:
    for c in comments:
        fh.write(f"# {c}\n")
    fh.write("t,ax,ay,az\n")
    for s in samples:
        fh.write(f"{s.t!r},{s.ax!r},{s.ay!r},{s.az!r}\n")
