"""Run configuration shared by the command line tools.

Configuration files are flat TOML (``key = value`` lines, ``#`` comments,
no tables). Unknown keys are rejected. Command line flags override file
values, which override the defaults below.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .evo import EvoConfig
from .hyperopt import MetaConfig
from .signal import GRAVITY, StreamConfig

__all__ = ["RunConfig", "ConfigError", "load_config"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    # stream
    window_len_s: float = 3.0
    update_period_s: float = 1.0
    rate_hz: float = 100.0
    gravity: float = GRAVITY
    # fitter
    mu: int = 400
    g_max: int = 10
    epsilon: float = 0.5
    c_min: float = 0.05
    m_const: float = 0.999
    estimator: str = "evo"
    # synthetic data
    n_freqs: int = 10
    duration_s: float = 3.0
    noise_fraction: float = 0.1
    noise_sigma: Optional[float] = None
    # hyperparameter search
    de_pop: int = 100
    de_iters: int = 100
    rounds: int = 100
    workers: int = 1
    seed: int = 0

    def stream(self) -> StreamConfig:
        return StreamConfig(self.window_len_s, self.update_period_s, self.rate_hz, self.gravity)

    def evo(self) -> EvoConfig:
        return EvoConfig(
            mu=self.mu, g_max=self.g_max, epsilon=self.epsilon,
            c_min=self.c_min, m_const=self.m_const, seed=self.seed,
        )

    def meta(self) -> MetaConfig:
        return MetaConfig(
            de_pop=self.de_pop, de_iters=self.de_iters, rounds=self.rounds,
            seed=self.seed, n_freqs=self.n_freqs, noise_fraction=self.noise_fraction,
            workers=self.workers,
        )

    def validate(self) -> "RunConfig":
        if self.estimator not in ("evo", "fft"):
            raise ConfigError(f"estimator must be 'evo' or 'fft', got {self.estimator!r}")
        if self.noise_fraction < 0 or (self.noise_sigma is not None and self.noise_sigma < 0):
            raise ConfigError("noise must be >= 0")
        if not (self.duration_s > 0 and math.isfinite(self.duration_s)):
            raise ConfigError("duration_s must be positive")
        try:
            self.stream()
            self.evo()
            self.meta()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def updated(self, **overrides) -> "RunConfig":
        known = {f.name: f for f in fields(self)}
        clean = {}
        for key, value in overrides.items():
            if key not in known:
                raise ConfigError(f"unknown configuration key {key!r}")
            if value is None:
                continue
            clean[key] = _coerce(known[key], value)
        return replace(self, **clean)


def _coerce(f, value):
    typ = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
    try:
        if typ == "int":
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if typ in ("float", "Optional[float]"):
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if typ == "str":
            if not isinstance(value, str):
                raise ValueError
            return value
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {f.name}: {value!r}") from None
    return value


def load_config(path: Optional[str], base: RunConfig = RunConfig()) -> RunConfig:
    """Read a flat TOML file on top of ``base``."""
    if path is None:
        return base
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from None
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"tables are not supported: {nested}")
    return base.updated(**data)
