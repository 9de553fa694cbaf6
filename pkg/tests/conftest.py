import os
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from pertrk import numeric as nm  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(autouse=True)
def _restore_policy():
    old = nm.get_policy()
    yield
    nm.set_policy(old)


def small_fractions(lo=-2, hi=2, denom=6):
    return st.builds(Fraction, st.integers(lo * denom, hi * denom), st.just(denom))


@st.composite
def explicit_tableaux(draw, min_s=1, max_s=4, nonneg=False):
    """Random explicit ``(A, b)`` with small rational entries."""
    s = draw(st.integers(min_s, max_s))
    lo = 0 if nonneg else -2
    frac = small_fractions(lo, 2)
    A = [[draw(frac) if j < i else Fraction(0) for j in range(s)] for i in range(s)]
    b = [draw(frac) for _ in range(s)]
    return A, b


@st.composite
def explicit_pairs(draw, min_s=1, max_s=4):
    A, b = draw(explicit_tableaux(min_s, max_s))
    s = len(b)
    frac = small_fractions(0, 1)
    At = [[draw(frac) if j < i else Fraction(0) for j in range(s)] for i in range(s)]
    bt = [draw(frac) for _ in range(s)]
    return A, b, At, bt


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def fnorm(M):
    return float(np.max(np.abs(np.asarray(M, dtype=float)), initial=0.0))
