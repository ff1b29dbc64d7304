import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cprfit.errors import InsufficientParentsError
from cprfit.evo import (
    LAMBDA,
    EvoConfig,
    FitterState,
    SineFitter,
    fit_window,
    init_population,
    reseed_fraction,
    spawn_offspring,
    step_generation,
)
from cprfit.model import SineParams, rmse_batch
from cprfit.signal import windows
from cprfit.synth import SynthSpec, synthesize, synthesize_recording

TWO_PI = 2 * math.pi


def in_bounds(pop, cfg):
    lo, hi = cfg.lower, cfg.upper
    return bool(
        np.all(pop[:, :2] >= lo[:2])
        and np.all(pop[:, :2] <= hi[:2])
        and np.all(pop[:, 2] >= 0.0)
        and np.all(pop[:, 2] < TWO_PI)
    )


def evaluated_state(cfg, window):
    state = init_population(cfg)
    f = rmse_batch(state.population, window.samples, window.times)
    order = np.argsort(f, kind="stable")
    state.population, state.fitness = state.population[order], f[order]
    return state


@pytest.fixture
def window():
    return synthesize(SynthSpec(1.8, 0.03, 0.4, seed=3))


def test_defaults():
    cfg = EvoConfig()
    assert (cfg.mu, cfg.lam, cfg.g_max, cfg.epsilon, cfg.c_min, cfg.m_const) == (400, 5, 10, 0.5, 0.05, 0.999)
    assert cfg.bounds[0] == (0.001, 0.05)
    assert cfg.bounds[1] == pytest.approx((math.pi, 7 * math.pi))
    assert cfg.bounds[2] == pytest.approx((0.0, TWO_PI))


@pytest.mark.parametrize(
    "kwargs", [dict(mu=4), dict(epsilon=1.5), dict(epsilon=-0.1), dict(m_const=1.0), dict(m_const=0.0), dict(g_max=-1)]
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        EvoConfig(**kwargs)


def test_init_population():
    cfg = EvoConfig(seed=1)
    state = init_population(cfg)
    assert state.population.shape == (400, 3)
    assert state.fitness is None
    assert in_bounds(state.population, cfg)
    again = init_population(cfg)
    assert state.population.tobytes() == again.population.tobytes()


@pytest.mark.parametrize("eps, replaced", [(0.5, 200), (0.0, 0), (1.0, 400), (0.3, 120), (0.001, 1)])
def test_reseed_replaces_worst_fraction(window, eps, replaced):
    cfg = EvoConfig(seed=2, epsilon=eps)
    state = evaluated_state(cfg, window)
    before = state.population.copy()
    reseed_fraction(state, cfg)
    changed = np.any(state.population != before, axis=1)
    assert changed.sum() == replaced
    assert not changed[: 400 - replaced].any()
    assert len(state.population) == 400
    assert in_bounds(state.population, cfg)


def test_spawn_draw_order_matches_replica(window):
    cfg = EvoConfig(seed=9)
    state = evaluated_state(cfg, window)
    replica = np.random.Generator(np.random.PCG64())
    replica.bit_generator.state = state.rng.bit_generator.state
    children = spawn_offspring(state, cfg)

    pop, lo, hi = state.population, cfg.lower, cfg.upper
    expected = [lo + (hi - lo) * replica.random(3)]
    expected.append(replica.uniform(0.999, 1.001, 3) * pop[0])
    for _ in range(3):
        a = int(replica.integers(400))
        b = int(replica.integers(399))
        b += b >= a
        l, h = np.minimum(pop[a], pop[b]), np.maximum(pop[a], pop[b])
        expected.append(l + (h - l) * replica.random(3))
    expected = np.array(expected)
    expected[:, 0] = np.clip(expected[:, 0], lo[0], hi[0])
    expected[:, 1] = np.clip(expected[:, 1], lo[1], hi[1])
    expected[:, 2] %= TWO_PI
    np.testing.assert_array_equal(children, expected)


def test_mutant_within_tenth_of_percent(window):
    cfg = EvoConfig(seed=4)
    state = evaluated_state(cfg, window)
    x0 = np.array([0.02, 6.28, 1.0])
    for _ in range(200):
        state.population[0] = x0
        child = spawn_offspring(state, cfg)[1]
        assert np.all(np.abs(child / x0 - 1.0) <= 0.001 + 1e-12)


def test_identical_parents_give_exact_child(window):
    cfg = EvoConfig(mu=5, seed=0)
    state = FitterState(population=np.tile([0.02, 9.0, 2.0], (5, 1)), rng=np.random.default_rng(0))
    children = spawn_offspring(state, cfg)
    np.testing.assert_array_equal(children[2:], np.tile([0.02, 9.0, 2.0], (3, 1)))


def test_random_child_in_bounds():
    cfg = EvoConfig(seed=11)
    state = init_population(cfg)
    for _ in range(500):
        assert in_bounds(spawn_offspring(state, cfg)[:1], cfg)


def test_insufficient_parents():
    state = FitterState(population=np.array([[0.02, 9.0, 2.0]]), rng=np.random.default_rng(0))
    with pytest.raises(InsufficientParentsError):
        spawn_offspring(state, EvoConfig())


def test_children_repaired_into_bounds():
    cfg = EvoConfig(seed=0)
    # incumbent sits on the upper edges; the mutant must be clamped / wrapped
    pop = np.tile([0.05, 7 * math.pi, TWO_PI - 1e-9], (10, 1))
    state = FitterState(population=pop, rng=np.random.default_rng(1))
    for _ in range(50):
        assert in_bounds(spawn_offspring(state, cfg), cfg)


def test_step_generation_selection_contract(window):
    cfg = EvoConfig(seed=5, c_min=0.0)
    state = evaluated_state(cfg, window)
    prev = state.fitness[0]
    for _ in range(30):
        step_generation(state, cfg, window)
        assert len(state.population) == cfg.mu
        assert np.all(np.diff(state.fitness) >= 0)
        assert state.fitness[0] <= prev
        prev = state.fitness[0]
        # cached fitness must agree with a fresh evaluation
        np.testing.assert_allclose(state.fitness, rmse_batch(state.population, window.samples, window.times))


def test_long_run_drives_loss_down():
    w = synthesize(SynthSpec(1.7, 0.03, 1.1, noise_sigma=0.0))
    ratios = []
    for seed in range(5):
        cfg = EvoConfig(g_max=200, c_min=0.0, seed=seed)
        state = init_population(cfg)
        est = fit_window(state, cfg, w)
        assert est.generations == 200
        assert np.all(np.diff(state.history) <= 0)
        ratios.append(state.history[-1] / state.history[0])
    # the x0 mutation only moves 0.1% per step, so the loss shrinks but does not reach 0
    assert max(ratios) < 0.5
    assert np.median(ratios) < 0.35


def test_g_max_zero_returns_initial_best(window):
    cfg = EvoConfig(g_max=0, seed=6)
    state = init_population(cfg)
    initial = state.population.copy()
    est = fit_window(state, cfg, window)
    f = rmse_batch(initial, window.samples, window.times)
    assert est.generations == 0
    assert est.loss == pytest.approx(f.min())
    np.testing.assert_array_equal(est.params.as_array(), initial[np.argmin(f)])


def test_fit_window_on_stream_recovers_2hz():
    # 2 Hz (120 cpm), 2.5 cm amplitude, noise at 5% of the peak acceleration
    spec = SynthSpec(2.0, 0.025, 0.7, duration_s=25.0, noise_sigma=0.05 * 0.025 * (4 * math.pi) ** 2, seed=1)
    ests = list(SineFitter(EvoConfig(seed=1)).stream(windows(synthesize_recording(spec))))
    late = ests[-5:]
    assert all(abs(e.ccf - 120.0) <= 2.5 for e in late)
    assert all(abs(e.ccd - 5.0) <= 0.5 for e in late)


@pytest.mark.parametrize("seed", range(5))
def test_consecutive_windows_agree(seed):
    spec = SynthSpec(2.0, 0.025, 0.7, duration_s=25.0, noise_sigma=0.0)
    cfg = EvoConfig(seed=seed)
    ests = list(SineFitter(cfg).stream(windows(synthesize_recording(spec))))
    assert all(e.generations <= cfg.g_max for e in ests)
    # after a few windows of retention the estimate no longer jumps
    settled = [e.ccf for e in ests[10:]]
    assert np.max(np.abs(np.diff(settled))) <= 1.0


def test_phase_advance_keeps_incumbent_fit():
    spec = SynthSpec(1.37, 0.02, 2.0, duration_s=5.0, noise_sigma=0.0)
    ws = list(windows(synthesize_recording(spec)))
    cfg = EvoConfig(seed=3, epsilon=1.0 - 1e-9)
    state = init_population(cfg)
    fit_window(state, cfg, ws[0])
    state.population[0] = spec.params.as_array()
    cfg_keep = EvoConfig(seed=3, epsilon=0.0, g_max=0)
    est = fit_window(state, cfg_keep, ws[2])
    assert est.loss < 1e-9


def test_determinism():
    spec = SynthSpec(1.5, 0.02, 0.2, duration_s=8.0, seed=4)
    rec = synthesize_recording(spec)
    run = lambda: [e.params.as_array().tobytes() for e in SineFitter(EvoConfig(seed=21)).stream(windows(rec))]
    assert run() == run()


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    eps=st.floats(0.0, 1.0),
    mu=st.integers(5, 60),
    f=st.floats(0.5, 3.5),
)
def test_invariants_over_stream(seed, eps, mu, f):
    cfg = EvoConfig(mu=mu, epsilon=eps, g_max=6, c_min=0.0, seed=seed)
    spec = SynthSpec(f, 0.02, 0.5, duration_s=5.0, seed=seed)
    state = init_population(cfg)

    def check(s):
        assert len(s.population) == mu
        assert in_bounds(s.population, cfg)

    for w in windows(synthesize_recording(spec)):
        fit_window(state, cfg, w, callback=check)
        check(state)
        assert np.all(np.diff(state.history) <= 0)
        assert np.all(state.fitness >= 0)


@pytest.mark.xfail(strict=True, reason="fresh-population fits plateau near 1-2 cpm median; see decisions ledger")
def test_noise_free_median_ccf_error_below_one_cpm():
    rng = np.random.default_rng(77)
    errs = []
    for i in range(60):
        omega = rng.uniform(math.pi, 7 * math.pi)
        spec = SynthSpec(omega / TWO_PI, rng.uniform(0.01, 0.05), rng.uniform(0, TWO_PI), noise_sigma=0.0)
        cfg = EvoConfig(g_max=50, seed=i)
        est = fit_window(init_population(cfg), cfg, synthesize(spec))
        errs.append(abs(est.ccf - spec.ccf))
    assert np.median(errs) < 1.0
