"""Differential Evolution over the fitter's hyperparameters.

Each DE individual is a ``(mu, g_max, epsilon, c_min)`` vector scored by
running the fitter on a round of labelled synthetic windows:

    cost = mu * g_max * sum|ccf_pred - ccf_true| * sum|ccd_pred - ccd_true|

The DE variant is rand/1/bin with greedy one-to-one replacement and box
clipping, run in the unit hypercube and mapped onto the parameter box.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import CprFitError
from .evo import EvoConfig, fit_window, init_population
from .synth import DEFAULT_NOISE_FRACTION, SynthSpec, random_corpus

__all__ = [
    "HYPER_BOUNDS",
    "HyperVector",
    "MetaConfig",
    "meta_cost",
    "cost_from_errors",
    "de_optimize",
    "HyperoptResult",
    "FAIL_CCF",
    "FAIL_CCD",
]

logger = logging.getLogger(__name__)

HYPER_NAMES = ("mu", "g_max", "epsilon", "c_min")
HYPER_BOUNDS = np.array([[20.0, 1000.0], [2.0, 50.0], [0.0, 1.0], [0.0, 0.2]])
FAIL_CCF = 210.0
FAIL_CCD = 10.0


@dataclass(frozen=True)
class HyperVector:
    mu: int
    g_max: int
    epsilon: float
    c_min: float

    @classmethod
    def from_array(cls, x: Sequence[float]) -> "HyperVector":
        """Clip into the box and round the integer dimensions."""
        x = np.clip(np.asarray(x, dtype=float), HYPER_BOUNDS[:, 0], HYPER_BOUNDS[:, 1])
        return cls(int(round(x[0])), int(round(x[1])), float(x[2]), float(x[3]))

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.g_max, self.epsilon, self.c_min], dtype=float)

    def evo_config(self, seed=None) -> EvoConfig:
        return EvoConfig(mu=self.mu, g_max=self.g_max, epsilon=self.epsilon, c_min=self.c_min, seed=seed)


@dataclass(frozen=True)
class MetaConfig:
    de_pop: int = 100
    de_iters: int = 100
    rounds: int = 100
    seed: int = 0
    mutation: float = 0.8
    crossover: float = 0.9
    n_freqs: int = 10
    noise_fraction: float = DEFAULT_NOISE_FRACTION
    workers: int = 1

    def __post_init__(self):
        if self.de_pop < 4:
            raise ValueError("rand/1/bin needs de_pop >= 4")
        if self.de_iters < 0 or self.rounds < 1 or self.n_freqs < 1:
            raise ValueError("de_iters >= 0, rounds >= 1 and n_freqs >= 1 required")


def cost_from_errors(mu: int, g_max: int, ccf_errors, ccd_errors) -> float:
    """``mu * g_max * sum|ccf errors| * sum|ccd errors|``."""
    sum_f = float(np.sum(np.abs(ccf_errors)))
    sum_d = float(np.sum(np.abs(ccd_errors)))
    if sum_f == 0.0 or sum_d == 0.0:
        logger.info("degenerate cost: an error sum is zero (ccf %g, ccd %g)", sum_f, sum_d)
    return mu * g_max * sum_f * sum_d


def meta_cost(h: HyperVector, corpus, seed=None) -> float:
    """Run the fitter with ``h`` on every labelled window and score it.

    Every window starts from a fresh population. A window whose fit raises
    contributes the worst-case errors ``FAIL_CCF`` and ``FAIL_CCD``.
    """
    seeds = np.random.SeedSequence(seed).spawn(len(corpus))
    cfg = h.evo_config()
    err_f, err_d = [], []
    for (window, truth), ss in zip(corpus, seeds):
        try:
            state = init_population(cfg, np.random.default_rng(ss))
            est = fit_window(state, cfg, window)
            err_f.append(est.ccf - truth.ccf)
            err_d.append(est.ccd - truth.ccd)
        except (CprFitError, ValueError) as exc:
            logger.warning("fit failed for %s: %s", h, exc)
            err_f.append(FAIL_CCF)
            err_d.append(FAIL_CCD)
    return cost_from_errors(h.mu, h.g_max, err_f, err_d)


@dataclass
class HyperoptResult:
    summary: dict
    best: List[HyperVector]
    best_cost: List[float]
    best_history: List[List[float]]
    trace: List[dict] = field(repr=False, default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "summary": self.summary,
            "rounds": [
                {"best": asdict(b), "cost": c, "best_history": hist}
                for b, c, hist in zip(self.best, self.best_cost, self.best_history)
            ],
            "meta": self.meta,
        }


def _eval_job(args) -> float:
    x, corpus, seed_key = args
    return meta_cost(HyperVector.from_array(x), corpus, seed_key)


def _scale(u: np.ndarray) -> np.ndarray:
    lo, hi = HYPER_BOUNDS[:, 0], HYPER_BOUNDS[:, 1]
    return lo + u * (hi - lo)


def summarize(vectors: Sequence[HyperVector]) -> dict:
    """Mean, min, max, median and SD per hyperparameter over rounds."""
    arr = np.array([v.as_array() for v in vectors])
    out = {}
    for j, name in enumerate(HYPER_NAMES):
        col = arr[:, j]
        out[name] = {
            "mean": float(col.mean()),
            "min": float(col.min()),
            "max": float(col.max()),
            "median": float(np.median(col)),
            "sd": float(col.std(ddof=1)) if len(col) > 1 else 0.0,
        }
    return out


def de_optimize(cfg: MetaConfig = MetaConfig(), progress: Optional[Callable[[int, int, float], None]] = None) -> HyperoptResult:
    """Repeat a DE hyperparameter search ``cfg.rounds`` times.

    Each round draws a fresh corpus. The initial population and every
    iteration's trial vectors are evaluated, so the trace has
    ``de_pop * (de_iters + 1) * rounds`` rows. Fitter seeds are derived
    from ``(seed, round, iteration, index)`` so results do not depend on
    ``workers``.
    """
    master = np.random.SeedSequence(cfg.seed)
    round_seeds = master.spawn(cfg.rounds)
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    mapper = pool.map if pool is not None else map
    trace, bests, best_costs, histories = [], [], [], []
    try:
        for r, rseed in enumerate(round_seeds):
            corpus_seed, de_seed = rseed.spawn(2)
            corpus = random_corpus(cfg.n_freqs, seed=corpus_seed, noise_fraction=cfg.noise_fraction)
            rng = np.random.default_rng(de_seed)

            def evaluate(u: np.ndarray, it: int) -> np.ndarray:
                jobs = [(_scale(ui), corpus, (cfg.seed, r, it, i)) for i, ui in enumerate(u)]
                costs = np.fromiter(mapper(_eval_job, jobs), dtype=float, count=len(jobs))
                for i, (ui, c) in enumerate(zip(u, costs)):
                    h = HyperVector.from_array(_scale(ui))
                    trace.append({"round": r, "iteration": it, "index": i, **asdict(h), "cost": float(c)})
                return costs

            pop = rng.random((cfg.de_pop, 4))
            cost = evaluate(pop, 0)
            history = [float(cost.min())]
            for it in range(1, cfg.de_iters + 1):
                trials = np.empty_like(pop)
                for i in range(cfg.de_pop):
                    others = [k for k in range(cfg.de_pop) if k != i]
                    r1, r2, r3 = rng.choice(others, 3, replace=False)
                    mutant = pop[r1] + cfg.mutation * (pop[r2] - pop[r3])
                    cross = rng.random(4) < cfg.crossover
                    cross[rng.integers(4)] = True
                    trials[i] = np.clip(np.where(cross, mutant, pop[i]), 0.0, 1.0)
                tcost = evaluate(trials, it)
                better = tcost <= cost
                pop[better] = trials[better]
                cost[better] = tcost[better]
                history.append(float(cost.min()))
                if progress is not None:
                    progress(r, it, history[-1])
            b = int(np.argmin(cost))
            bests.append(HyperVector.from_array(_scale(pop[b])))
            best_costs.append(float(cost[b]))
            histories.append(history)
    finally:
        if pool is not None:
            pool.shutdown()
    meta = {"config": asdict(cfg), "strategy": "rand/1/bin", "bounds": dict(zip(HYPER_NAMES, HYPER_BOUNDS.tolist()))}
    return HyperoptResult(summarize(bests), bests, best_costs, histories, trace, meta)
