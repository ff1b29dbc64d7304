"""Evolution-Strategy style sine fitter with population retention.

A (mu + lambda) scheme where each generation produces exactly five
offspring: one fresh random individual, one minimal multiplicative
mutation of the incumbent best, and three BLX-0 crossovers of random
parent pairs. The population is carried from window to window; only a
fraction ``epsilon`` of it (the worst ranked) is redrawn at each new
window.

The population is stored as an ``(mu, 3)`` array with columns
``(A, omega, rho)``, kept sorted by ascending RMSE so ``population[0]`` is
the incumbent best.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Tuple

import numpy as np

from .errors import EmptyWindowError, InsufficientParentsError
from .model import TWO_PI, CprEstimate, SineParams, rmse_batch, to_estimate
from .signal import Window

__all__ = [
    "LAMBDA",
    "DEFAULT_BOUNDS",
    "EvoConfig",
    "Individual",
    "FitterState",
    "init_population",
    "reseed_fraction",
    "spawn_offspring",
    "step_generation",
    "fit_window",
    "convergence",
    "SineFitter",
]

LAMBDA = 5  # 1 random + 1 mutant + 3 crossover children

# A in meters (0.1 .. 5 cm), omega for 30..210 cpm, rho over a full turn.
DEFAULT_BOUNDS = ((0.001, 0.05), (math.pi, 7.0 * math.pi), (0.0, TWO_PI))


@dataclass(frozen=True)
class EvoConfig:
    """Fitter hyperparameters.

    Parameters
    ----------
    mu : int
        Population size.
    g_max : int
        Maximum generations per window.
    epsilon : float
        Fraction of the population redrawn at each new window.
    c_min : float
        Stop once the best RMSE relative to the window RMS drops below this.
    m_const : float
        Mutation factors are drawn from ``U(m_const, 2 - m_const)``.
    bounds : tuple of (low, high)
        Search box for ``(A, omega, rho)``.
    seed : int, optional
        Seed for the fitter's random generator.
    """

    mu: int = 400
    g_max: int = 10
    epsilon: float = 0.5
    c_min: float = 0.05
    m_const: float = 0.999
    bounds: Tuple[Tuple[float, float], ...] = DEFAULT_BOUNDS
    seed: Optional[int] = None

    def __post_init__(self):
        if self.mu < LAMBDA:
            raise ValueError(f"mu must be >= {LAMBDA}, got {self.mu}")
        if self.g_max < 0:
            raise ValueError("g_max must be >= 0")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if not 0.0 < self.m_const < 1.0:
            raise ValueError("m_const must lie in (0, 1)")
        if len(self.bounds) != 3 or any(not lo <= hi for lo, hi in self.bounds):
            raise ValueError("bounds must be three (low, high) pairs")

    @property
    def lam(self) -> int:
        return LAMBDA

    @property
    def lower(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds], dtype=float)


@dataclass(frozen=True)
class Individual:
    params: SineParams
    fitness: Optional[float]


@dataclass
class FitterState:
    population: np.ndarray
    rng: np.random.Generator
    fitness: Optional[np.ndarray] = None
    windows_seen: int = 0
    last_start_t: Optional[float] = None
    generation_count_last_window: int = 0
    # best RMSE after the initial evaluation and after every generation
    history: list = field(default_factory=list)

    @property
    def best(self) -> Individual:
        f = None if self.fitness is None else float(self.fitness[0])
        return Individual(SineParams.from_array(self.population[0]), f)

    def individuals(self) -> list:
        fit = [None] * len(self.population) if self.fitness is None else self.fitness
        return [
            Individual(SineParams.from_array(x), None if f is None else float(f))
            for x, f in zip(self.population, fit)
        ]


def _draw(rng: np.random.Generator, cfg: EvoConfig, n: int) -> np.ndarray:
    lo, hi = cfg.lower, cfg.upper
    return lo + (hi - lo) * rng.random((n, 3))


def _repair(x: np.ndarray, cfg: EvoConfig) -> np.ndarray:
    """Clamp A and omega into the box, wrap rho onto [0, 2pi)."""
    lo, hi = cfg.lower, cfg.upper
    x[:, 0] = np.clip(x[:, 0], lo[0], hi[0])
    x[:, 1] = np.clip(x[:, 1], lo[1], hi[1])
    rho = np.mod(x[:, 2], TWO_PI)
    x[:, 2] = np.where(rho >= TWO_PI, 0.0, rho)
    return x


def init_population(cfg: EvoConfig, rng: Optional[np.random.Generator] = None) -> FitterState:
    """Draw ``mu`` individuals uniformly from the search box (unevaluated)."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    return FitterState(population=_draw(rng, cfg, cfg.mu), rng=rng)


def reseed_fraction(state: FitterState, cfg: EvoConfig) -> None:
    """Replace the ``ceil(epsilon * mu)`` worst-ranked individuals in place."""
    k = math.ceil(cfg.epsilon * cfg.mu - 1e-9)
    if k <= 0:
        return
    mu = len(state.population)
    state.population[mu - k :] = _draw(state.rng, cfg, k)
    if state.fitness is not None:
        state.fitness = state.fitness.copy()
        state.fitness[mu - k :] = np.nan


def spawn_offspring(state: FitterState, cfg: EvoConfig) -> np.ndarray:
    """Create the five children of one generation as a ``(5, 3)`` array.

    Random draws happen in a fixed order: fresh child, mutation factors,
    then for each crossover child its two parent indices followed by its
    three blend draws.
    """
    pop = state.population
    mu = len(pop)
    if mu < 2:
        raise InsufficientParentsError(f"crossover needs >= 2 individuals, have {mu}")
    rng = state.rng
    children = np.empty((LAMBDA, 3))
    children[0] = _draw(rng, cfg, 1)[0]
    m = rng.uniform(cfg.m_const, 2.0 - cfg.m_const, 3)
    children[1] = m * pop[0]
    for j in range(2, LAMBDA):
        a = int(rng.integers(mu))
        b = int(rng.integers(mu - 1))
        if b >= a:
            b += 1
        lo = np.minimum(pop[a], pop[b])
        hi = np.maximum(pop[a], pop[b])
        children[j] = lo + (hi - lo) * rng.random(3)
    return _repair(children, cfg)


def _evaluate_all(state: FitterState, w: Window) -> None:
    state.fitness = rmse_batch(state.population, w.samples, w.times)
    order = np.argsort(state.fitness, kind="stable")
    state.population = state.population[order]
    state.fitness = state.fitness[order]


def convergence(state: FitterState, w: Window) -> float:
    """Best RMSE divided by the RMS of the window (``inf`` for a zero window)."""
    rms = float(np.sqrt(np.mean(w.samples * w.samples)))
    best = float(state.fitness[0])
    if rms == 0.0:
        return 0.0 if best == 0.0 else math.inf
    return best / rms


def step_generation(state: FitterState, cfg: EvoConfig, w: Window) -> bool:
    """Run one generation in place; return True when converged.

    The survivors' fitness is reused since the window does not change
    within one fit.
    """
    if state.fitness is None or np.isnan(state.fitness).any():
        _evaluate_all(state, w)
    children = spawn_offspring(state, cfg)
    child_fit = rmse_batch(children, w.samples, w.times)
    pop = np.concatenate([state.population, children])
    fit = np.concatenate([state.fitness, child_fit])
    keep = np.argsort(fit, kind="stable")[: len(state.population)]
    state.population = pop[keep]
    state.fitness = fit[keep]
    state.history.append(float(state.fitness[0]))
    return convergence(state, w) < cfg.c_min


def _advance_phase(state: FitterState, dt: float) -> None:
    # Re-express retained solutions relative to the new window origin.
    if dt == 0.0:
        return
    rho = np.mod(state.population[:, 2] + state.population[:, 1] * dt, TWO_PI)
    state.population[:, 2] = np.where(rho >= TWO_PI, 0.0, rho)


def fit_window(
    state: FitterState,
    cfg: EvoConfig,
    w: Window,
    callback: Optional[Callable[[FitterState], None]] = None,
) -> CprEstimate:
    """Fit one window, updating ``state`` in place, and return the estimate.

    On every window but the first, retained individuals have their phase
    advanced by ``omega * (start_t - previous start_t)`` so they describe
    the same continuous sinusoid in the new window's time origin, then the
    worst ``epsilon`` fraction is redrawn. Generations run until ``g_max``
    or until :func:`convergence` falls below ``c_min``.

    ``callback``, if given, is called with the state after each generation.
    """
    if len(w) == 0:
        raise EmptyWindowError("cannot fit an empty window")
    if state.windows_seen > 0:
        if state.last_start_t is not None:
            _advance_phase(state, w.start_t - state.last_start_t)
        reseed_fraction(state, cfg)
    _evaluate_all(state, w)
    state.history = [float(state.fitness[0])]

    g = 0
    converged = convergence(state, w) < cfg.c_min
    while g < cfg.g_max and not converged:
        converged = step_generation(state, cfg, w)
        g += 1
        if callback is not None:
            callback(state)

    state.generation_count_last_window = g
    state.windows_seen += 1
    state.last_start_t = w.start_t
    best = SineParams.from_array(state.population[0])
    return to_estimate(best, float(state.fitness[0]), w.start_t, w.duration, g)


class SineFitter:
    """Stateful convenience wrapper for streaming use.

    >>> fitter = SineFitter(EvoConfig(seed=1))
    >>> for est in fitter.stream(windows(samples)):  # doctest: +SKIP
    ...     print(est.ccf, est.ccd)
    """

    def __init__(self, cfg: EvoConfig = EvoConfig()):
        self.cfg = cfg
        self.state = init_population(cfg)

    def fit(self, w: Window) -> CprEstimate:
        return fit_window(self.state, self.cfg, w)

    def stream(self, wins: Iterable[Window]) -> Iterator[CprEstimate]:
        for w in wins:
            yield self.fit(w)
