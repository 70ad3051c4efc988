import cmath
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from xxzqk.config import DEFAULT_A, DEFAULT_HBAR
from xxzqk.core import make_params, parse_complex

settings.register_profile("xxzqk", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("xxzqk")

# well-separated characters near the unit circle; every test family slices these
A_UNIT = tuple(parse_complex(x) for x in DEFAULT_A[:6])
HBAR = parse_complex(DEFAULT_HBAR)


def unit_params(n, hbar=HBAR, precision=53, q=0.9):
    return make_params(n, A_UNIT[:n], hbar, q=q, precision=precision)


def quadratic_roots(a1, a2, hbar, z):
    """Both roots of (s - a1)(s - a2) = z hbar^{-1} (hbar a1 - s)(hbar a2 - s)."""
    c = z / hbar
    A = 1 - c
    B = -(a1 + a2) + c * hbar * (a1 + a2)
    C = a1 * a2 - c * hbar ** 2 * a1 * a2
    disc = cmath.sqrt(B * B - 4 * A * C)
    return (-B + disc) / (2 * A), (-B - disc) / (2 * A)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def p2():
    return make_params(2, (1.0, 2.0), 0.3)


@pytest.fixture(scope="session")
def unit():
    return unit_params


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
