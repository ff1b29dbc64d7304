import sys

import numpy as np
import pytest

from cprfit.signal import ImuSample


def uniform_stream(duration_s, rate_hz=100.0, value=0.0, gravity=9.81, t0=0.0):
    n = int(round(duration_s * rate_hz))
    return [ImuSample(t0 + i / rate_hz, 0.0, 0.0, value + gravity) for i in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
