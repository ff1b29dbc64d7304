"""Event alignment of window predictions and agreement statistics.

Each reference compression event is compared with the overlap-weighted
mean of every prediction whose window intersects it. Weights are the
fraction of the event covered by the window, normalized over the
contributing windows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from .errors import EmptyReportError, InvalidSampleError

__all__ = [
    "CompressionEvent",
    "AlignedPrediction",
    "MetricReport",
    "ErrorReport",
    "weighted_mean",
    "align",
    "error_report",
    "read_events",
    "write_events",
    "read_predictions",
    "Prediction",
]


@dataclass(frozen=True)
class CompressionEvent:
    start_t: float
    end_t: float
    ref_ccf: Optional[float] = None
    ref_ccd: Optional[float] = None

    def __post_init__(self):
        if not self.end_t > self.start_t:
            raise ValueError(f"event must have end_t > start_t, got {self!r}")
        if self.ref_ccf is None and self.ref_ccd is None:
            raise ValueError("event needs ref_ccf or ref_ccd")

    @property
    def duration(self) -> float:
        return self.end_t - self.start_t


@dataclass(frozen=True)
class Prediction:
    """Minimal prediction record; :class:`~cprfit.model.CprEstimate` and
    :class:`~cprfit.spectral.SpectralEstimate` have the same attributes."""

    window_start_t: float
    window_len_s: float
    ccf: float
    ccd: float = math.nan


@dataclass(frozen=True)
class AlignedPrediction:
    event: CompressionEvent
    pred_ccf: float
    pred_ccd: float
    n_contributors: int
    weights: Tuple[float, ...]


def weighted_mean(values: Sequence[float], weights: Sequence[float]) -> float:
    """``sum(w_i * f_i) / sum(w_i)``."""
    w = np.asarray(weights, dtype=float)
    f = np.asarray(values, dtype=float)
    return float(np.dot(w, f) / w.sum())


def align(events: Sequence[CompressionEvent], preds: Sequence) -> Tuple[List[AlignedPrediction], List[CompressionEvent]]:
    """Combine overlapping predictions per event.

    Parameters
    ----------
    events : sequence of CompressionEvent
    preds : sequence of objects with ``window_start_t``, ``window_len_s``,
        ``ccf`` and (optionally) ``ccd`` attributes.

    Returns
    -------
    aligned : list of AlignedPrediction
        One entry per event that at least one window overlaps.
    uncovered : list of CompressionEvent
        Events no window overlaps.
    """
    starts = np.array([p.window_start_t for p in preds], dtype=float)
    ends = starts + np.array([p.window_len_s for p in preds], dtype=float)
    ccf = np.array([p.ccf for p in preds], dtype=float)
    ccd = np.array([getattr(p, "ccd", math.nan) for p in preds], dtype=float)
    order = np.argsort(starts, kind="stable")
    starts, ends, ccf, ccd = starts[order], ends[order], ccf[order], ccd[order]
    max_len = float(np.max(ends - starts)) if len(starts) else 0.0

    aligned, uncovered = [], []
    for ev in events:
        # candidates start before the event ends and no earlier than max_len before it
        lo = np.searchsorted(starts, ev.start_t - max_len, side="left")
        hi = np.searchsorted(starts, ev.end_t, side="left")
        idx = np.arange(lo, hi)
        overlap = np.minimum(ends[idx], ev.end_t) - np.maximum(starts[idx], ev.start_t)
        hit = overlap > 0
        idx, overlap = idx[hit], overlap[hit]
        if len(idx) == 0:
            uncovered.append(ev)
            continue
        sigma = np.minimum(overlap / ev.duration, 1.0)
        aligned.append(
            AlignedPrediction(
                event=ev,
                pred_ccf=weighted_mean(ccf[idx], sigma),
                pred_ccd=weighted_mean(ccd[idx], sigma),
                n_contributors=len(idx),
                weights=tuple(float(s) for s in sigma),
            )
        )
    return aligned, uncovered


@dataclass
class MetricReport:
    """Absolute-error order statistics plus Bland-Altman data for one metric."""

    n: int
    median: float
    min: float
    max: float
    errors: List[float]
    ba_mean: List[float]
    ba_diff: List[float]
    bias: float
    sd: float
    loa_low: float
    loa_high: float

    @classmethod
    def from_pairs(cls, pred: np.ndarray, ref: np.ndarray) -> "MetricReport":
        diff = pred - ref
        err = np.abs(diff)
        bias = float(diff.mean())
        sd = float(diff.std(ddof=1)) if len(diff) > 1 else 0.0
        return cls(
            n=len(err),
            median=float(np.median(err)),
            min=float(err.min()),
            max=float(err.max()),
            errors=err.tolist(),
            ba_mean=((pred + ref) / 2.0).tolist(),
            ba_diff=diff.tolist(),
            bias=bias,
            sd=sd,
            loa_low=bias - 1.96 * sd,
            loa_high=bias + 1.96 * sd,
        )

    def summary(self) -> str:
        return f"{self.median:.2f} [{self.min:.1f}-{self.max:.1f}]"


@dataclass
class ErrorReport:
    ccf: Optional[MetricReport]
    ccd: Optional[MetricReport]
    n_events: int
    n_uncovered: int = 0
    rows: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _pairs(aligned, pred_attr, ref_attr):
    pred, ref = [], []
    for a in aligned:
        r = getattr(a.event, ref_attr)
        p = getattr(a, pred_attr)
        if r is None or not math.isfinite(p):
            continue
        pred.append(p)
        ref.append(r)
    return np.array(pred, dtype=float), np.array(ref, dtype=float)


def error_report(aligned: Sequence[AlignedPrediction], n_uncovered: int = 0) -> ErrorReport:
    """Absolute error statistics (median, min, max) and Bland-Altman pairs.

    Raises
    ------
    EmptyReportError
        If no aligned prediction has a reference value to compare against.
    """
    reports = {}
    for metric in ("ccf", "ccd"):
        pred, ref = _pairs(aligned, f"pred_{metric}", f"ref_{metric}")
        reports[metric] = MetricReport.from_pairs(pred, ref) if len(pred) else None
    if reports["ccf"] is None and reports["ccd"] is None:
        raise EmptyReportError("no aligned prediction with a reference value")
    rows = []
    for a in aligned:
        ev = a.event
        row = {"start_t": ev.start_t, "end_t": ev.end_t, "n_contributors": a.n_contributors}
        for metric in ("ccf", "ccd"):
            r = getattr(ev, f"ref_{metric}")
            p = getattr(a, f"pred_{metric}")
            row[f"ref_{metric}"] = r
            row[f"pred_{metric}"] = p if math.isfinite(p) else None
            row[f"err_{metric}"] = abs(p - r) if r is not None and math.isfinite(p) else None
        rows.append(row)
    return ErrorReport(reports["ccf"], reports["ccd"], len(aligned), n_uncovered, rows)


def _opt_float(cell: str, lineno: int) -> Optional[float]:
    cell = cell.strip()
    if cell == "":
        return None
    try:
        v = float(cell)
    except ValueError:
        raise InvalidSampleError(f"line {lineno}: not a number: {cell!r}") from None
    if not math.isfinite(v):
        raise InvalidSampleError(f"line {lineno}: non-finite value {cell!r}")
    return v


def _data_rows(fh: TextIO):
    header = None
    for lineno, line in enumerate(fh, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        row = next(csv.reader([s]))
        if header is None:
            header = [c.strip() for c in row]
            continue
        if len(row) != len(header):
            raise InvalidSampleError(f"line {lineno}: expected {len(header)} columns, got {len(row)}")
        yield lineno, dict(zip(header, row))


def read_events(fh: TextIO) -> List[CompressionEvent]:
    """Parse ``start_t,end_t,ref_ccf,ref_ccd``. A missing ``ref_ccf`` is
    derived from the cycle duration as ``60 / (end_t - start_t)``."""
    events = []
    for lineno, row in _data_rows(fh):
        try:
            start, end = _opt_float(row["start_t"], lineno), _opt_float(row["end_t"], lineno)
        except KeyError:
            raise InvalidSampleError(f"line {lineno}: missing start_t/end_t column") from None
        if start is None or end is None or not end > start:
            raise InvalidSampleError(f"line {lineno}: invalid event interval")
        ref_ccf = _opt_float(row.get("ref_ccf", ""), lineno)
        ref_ccd = _opt_float(row.get("ref_ccd", ""), lineno)
        if ref_ccf is None:
            ref_ccf = 60.0 / (end - start)
        events.append(CompressionEvent(start, end, ref_ccf, ref_ccd))
    return events


def write_events(fh: TextIO, events: Iterable[CompressionEvent], comments: Iterable[str] = ()) -> None:
    for c in comments:
        fh.write(f"# {c}\n")
    fh.write("start_t,end_t,ref_ccf,ref_ccd\n")
    for e in events:
        ccf = "" if e.ref_ccf is None else repr(e.ref_ccf)
        ccd = "" if e.ref_ccd is None else repr(e.ref_ccd)
        fh.write(f"{e.start_t!r},{e.end_t!r},{ccf},{ccd}\n")


def read_predictions(fh: TextIO) -> List[Prediction]:
    """Read prediction rows written by ``cprfit fit`` (either estimator)."""
    preds = []
    for lineno, row in _data_rows(fh):
        try:
            start = _opt_float(row["window_start_t"], lineno)
            length = _opt_float(row["window_len_s"], lineno)
            ccf = _opt_float(row["ccf"], lineno)
        except KeyError as exc:
            raise InvalidSampleError(f"line {lineno}: missing column {exc}") from None
        if start is None or length is None or ccf is None:
            raise InvalidSampleError(f"line {lineno}: empty required cell")
        ccd = _opt_float(row.get("ccd", ""), lineno)
        preds.append(Prediction(start, length, ccf, math.nan if ccd is None else ccd))
    return preds
