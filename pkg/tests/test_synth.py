import math

import numpy as np
import pytest

from cprfit.model import rmse_loss
from cprfit.signal import total_acceleration, windows
from cprfit.synth import SynthSpec, random_corpus, cycle_events, synthesize, synthesize_recording


def test_clean_window_matches_model():
    spec = SynthSpec(2.0, 0.02, 0.0, noise_sigma=0.0)
    w = synthesize(spec)
    assert len(w) == 300
    assert rmse_loss(spec.params, w) == 0.0


def test_deterministic_with_seed():
    spec = SynthSpec(1.3, 0.04, 1.0, seed=5)
    np.testing.assert_array_equal(synthesize(spec).samples, synthesize(spec).samples)


def test_default_noise_is_tenth_of_peak():
    spec = SynthSpec(2.0, 0.02)
    assert spec.sigma == pytest.approx(0.1 * 0.02 * (4 * math.pi) ** 2)


def test_noise_statistics():
    sigma = 0.5
    spec = SynthSpec(1.5, 0.03, 0.2, duration_s=100.0, noise_sigma=sigma, seed=8)
    clean = synthesize(SynthSpec(1.5, 0.03, 0.2, duration_s=100.0, noise_sigma=0.0))
    resid = synthesize(spec).samples - clean.samples
    assert len(resid) == 10_000
    assert abs(resid.mean()) <= 3 * sigma / 100
    assert abs(resid.std() - sigma) <= 0.05 * sigma


def test_random_corpus():
    corpus = random_corpus(10, seed=3)
    assert len(corpus) == 10
    for w, spec in corpus:
        assert 60.0 <= spec.ccf <= 180.0
        assert 2.0 <= spec.ccd <= 10.0
        assert 0.0 <= spec.phase < 2 * math.pi
        assert spec.sigma == pytest.approx(0.1 * spec.peak_accel)
        assert len(w) == 300
    again = random_corpus(10, seed=3)
    for (w1, s1), (w2, s2) in zip(corpus, again):
        assert s1 == s2
        np.testing.assert_array_equal(w1.samples, w2.samples)
    with pytest.raises(ValueError):
        random_corpus(0)


def test_recording_recovers_signal_through_magnitude():
    # 1.2 Hz at 3 cm peaks at 1.7 m/s^2, well above -gravity
    spec = SynthSpec(1.2, 0.03, 0.4, duration_s=5.0, seed=2)
    rec = synthesize_recording(spec)
    recovered = np.array([total_acceleration(s) for s in rec])
    np.testing.assert_allclose(recovered, synthesize(spec).samples, rtol=0, atol=1e-12)
    assert [s.t for s in rec] == pytest.approx(np.arange(500) / 100)


def test_recording_rectifies_below_minus_gravity():
    spec = SynthSpec(3.0, 0.05, 0.0, noise_sigma=0.0)
    rec = synthesize_recording(spec)
    recovered = np.array([total_acceleration(s) for s in rec])
    assert recovered.min() >= -9.81 - 1e-12
    assert synthesize(spec).samples.min() < -9.81


def test_cycle_events():
    spec = SynthSpec(2.0, 0.02, duration_s=3.0)
    ev = cycle_events(spec)
    assert len(ev) == 6
    assert ev[0] == (0.0, 0.5)
    assert ev[-1][1] == pytest.approx(3.0)
