"""``cprfit`` command line entry point.

Subcommands: ``synth``, ``fit``, ``eval``, ``hyperopt``.
Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .errors import CprFitError
from .evaluation import CompressionEvent, Prediction, align, error_report, read_events, read_predictions, write_events
from .evo import SineFitter
from .hyperopt import HYPER_NAMES, de_optimize
from .signal import read_recording, windows, write_recording
from .spectral import fft_ccf
from .synth import random_specs, cycle_events, synthesize_recording

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config_line(cmd: str, cfg: RunConfig) -> str:
    return "config: " + json.dumps({"command": cmd, **cfg.to_dict()}, sort_keys=True)


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            yield fh


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


# -- synth ------------------------------------------------------------------

def cmd_synth(args, cfg: RunConfig) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    specs = random_specs(cfg.n_freqs, cfg.seed, cfg.noise_fraction, cfg.duration_s, cfg.rate_hz)
    if cfg.noise_sigma is not None:
        specs = [replace(s, noise_sigma=cfg.noise_sigma) for s in specs]
    header = [_config_line("synth", cfg)]
    truth_rows = []
    for i, spec in enumerate(specs):
        name = f"rec_{i:03d}"
        with open(out / f"{name}.csv", "w", newline="") as fh:
            write_recording(fh, synthesize_recording(spec, cfg.gravity), header)
        events = [CompressionEvent(a, b, spec.ccf, spec.ccd) for a, b in cycle_events(spec)]
        with open(out / f"{name}_events.csv", "w", newline="") as fh:
            write_events(fh, events, header)
        truth_rows.append([name, spec.freq_hz, spec.ccf, spec.amplitude_m, spec.ccd, spec.phase, spec.sigma])
    with open(out / "truth.csv", "w", newline="") as fh:
        fh.write(f"# {header[0]}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["recording", "freq_hz", "ccf", "amplitude_m", "ccd", "phase", "noise_sigma"])
        for row in truth_rows:
            w.writerow([_fmt(v) for v in row])
    return EXIT_OK


# -- fit --------------------------------------------------------------------

EVO_COLUMNS = ["window_start_t", "window_len_s", "ccf", "ccd", "loss", "generations", "A", "omega", "rho"]
FFT_COLUMNS = ["window_start_t", "window_len_s", "ccf", "peak_bin", "peak_magnitude"]


def _estimates(recording_fh, cfg: RunConfig):
    wins = windows(read_recording(recording_fh), cfg.stream())
    if cfg.estimator == "fft":
        for w in wins:
            e = fft_ccf(w)
            yield [e.window_start_t, e.window_len_s, e.ccf, e.peak_bin, e.peak_magnitude]
    else:
        for e in SineFitter(cfg.evo()).stream(wins):
            p = e.params
            yield [e.window_start_t, e.window_len_s, e.ccf, e.ccd, e.loss, e.generations, p.A, p.omega, p.rho]


def cmd_fit(args, cfg: RunConfig) -> int:
    columns = FFT_COLUMNS if cfg.estimator == "fft" else EVO_COLUMNS
    try:
        rec = open(args.recording, newline="")
    except OSError as exc:
        raise CprFitError(f"cannot open {args.recording}: {exc}") from None
    n = 0
    with rec, _output(args.output) as out:
        if args.format == "json":
            rows = [dict(zip(columns, r)) for r in _estimates(rec, cfg)]
            n = len(rows)
            json.dump({"config": {"command": "fit", **cfg.to_dict()}, "predictions": rows}, out, indent=2, sort_keys=True)
            out.write("\n")
        else:
            out.write(f"# {_config_line('fit', cfg)}\n")
            out.write(",".join(columns) + "\n")
            for row in _estimates(rec, cfg):
                out.write(",".join(_fmt(v) for v in row) + "\n")
                out.flush()
                n += 1
    if n == 0:
        print("warning: recording shorter than one window; no predictions", file=sys.stderr)
    return EXIT_OK


# -- eval -------------------------------------------------------------------

def _load_predictions(path):
    with open(path, newline="") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        try:
            rows = json.loads(text)["predictions"]
            return [Prediction(r["window_start_t"], r["window_len_s"], r["ccf"], r.get("ccd") or float("nan")) for r in rows]
        except (ValueError, KeyError, TypeError) as exc:
            raise CprFitError(f"{path}: malformed prediction JSON ({exc})") from None
    return read_predictions(io.StringIO(text))


ROW_COLUMNS = ["start_t", "end_t", "n_contributors", "ref_ccf", "pred_ccf", "err_ccf", "ref_ccd", "pred_ccd", "err_ccd"]


def cmd_eval(args, cfg: RunConfig) -> int:
    try:
        preds = _load_predictions(args.predictions)
        with open(args.reference, newline="") as fh:
            events = read_events(fh)
    except OSError as exc:
        raise CprFitError(str(exc)) from None
    aligned, uncovered = align(events, preds)
    if not aligned:
        raise CprFitError("no reference event overlaps any prediction window")
    report = error_report(aligned, len(uncovered))
    doc = {"config": {"command": "eval", **cfg.to_dict()}, **report.to_dict()}
    with _output(args.output) as out:
        json.dump(doc, out, indent=2, sort_keys=True)
        out.write("\n")
    if args.csv:
        with _output(args.csv) as out:
            out.write(f"# {_config_line('eval', cfg)}\n")
            out.write(",".join(ROW_COLUMNS) + "\n")
            for row in report.rows:
                out.write(",".join(_fmt(row[c]) for c in ROW_COLUMNS) + "\n")
    for name in ("ccf", "ccd"):
        m = getattr(report, name)
        if m is not None:
            print(f"{name.upper()}: {m.summary()} (n={m.n})", file=sys.stderr)
    return EXIT_OK


# -- hyperopt ---------------------------------------------------------------

def cmd_hyperopt(args, cfg: RunConfig) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    progress = None
    if args.verbose:
        def progress(r, it, best):
            print(f"round {r} iteration {it}: best cost {best:.6g}", file=sys.stderr)
    result = de_optimize(cfg.meta(), progress)
    doc = {"config": {"command": "hyperopt", **cfg.to_dict()}, **result.to_dict()}
    with open(out / "summary.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    cols = ["round", "iteration", "index", *HYPER_NAMES, "cost"]
    with open(out / "trace.csv", "w", newline="") as fh:
        fh.write(f"# {_config_line('hyperopt', cfg)}\n")
        fh.write(",".join(cols) + "\n")
        for row in result.trace:
            fh.write(",".join(_fmt(row[c]) for c in cols) + "\n")
    for name, s in result.summary.items():
        print(f"{name}: {s['mean']:.4g} [{s['min']:.4g}-{s['max']:.4g}]  median {s['median']:.4g} [SD {s['sd']:.3g}]", file=sys.stderr)
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="flat TOML configuration file")
    p.add_argument("--seed", type=int)


def _add_stream(p):
    p.add_argument("--window-len", dest="window_len_s", type=float)
    p.add_argument("--update-period", dest="update_period_s", type=float)
    p.add_argument("--rate", dest="rate_hz", type=float)
    p.add_argument("--gravity", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cprfit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write synthetic recordings and ground truth")
    _add_common(p)
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--freqs", dest="n_freqs", type=int)
    p.add_argument("--duration", dest="duration_s", type=float)
    p.add_argument("--rate", dest="rate_hz", type=float)
    p.add_argument("--gravity", type=float)
    p.add_argument("--noise-fraction", type=float)
    p.add_argument("--noise-sigma", type=float)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="estimate CCF/CCD per window of a recording")
    _add_common(p)
    _add_stream(p)
    p.add_argument("recording")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--estimator", choices=("evo", "fft"))
    p.add_argument("--mu", type=int)
    p.add_argument("--g-max", dest="g_max", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--c-min", dest="c_min", type=float)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="compare predictions with reference events")
    _add_common(p)
    p.add_argument("predictions")
    p.add_argument("reference")
    p.add_argument("-o", "--output", help="JSON report (default stdout)")
    p.add_argument("--csv", help="also write one flat row per event")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("hyperopt", help="differential-evolution hyperparameter search")
    _add_common(p)
    p.add_argument("-o", "--out", default="hyperopt", help="output directory")
    p.add_argument("--rounds", type=int)
    p.add_argument("--de-iters", type=int)
    p.add_argument("--de-pop", type=int)
    p.add_argument("--freqs", dest="n_freqs", type=int)
    p.add_argument("--noise-fraction", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_hyperopt)
    return parser


_NON_CONFIG = {"command", "func", "config", "out", "output", "recording", "predictions",
               "reference", "csv", "format", "verbose"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        overrides = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}
        cfg = cfg.updated(**overrides).validate()
    except ConfigError as exc:
        print(f"cprfit: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, cfg)
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_OK
    except (CprFitError, OSError) as exc:
        print(f"cprfit: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
