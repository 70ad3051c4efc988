import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xxzqk.bethe import BetheSystem, solve_all
from xxzqk.core import FixedPoint, SymmetricFunctionSpec, make_params
from xxzqk.errors import PoleHit
from xxzqk.vertex import (
    bracket, check_vertex, extract_eigenvalue, q_pochhammer, ratio_trend, trend_z_default, vertex_coefficient,
    vertex_ratio,
)

from conftest import A_UNIT, HBAR, quadratic_roots, unit_params

ONE = SymmetricFunctionSpec.custom(lambda s: 1, "1")
E1 = SymmetricFunctionSpec.elementary(1)


def phi(x, q, terms=400):
    out = 1
    for i in range(terms):
        out *= 1 - q ** i * x
    return out


# --- brackets -----------------------------------------------------------------

def test_bracket_degree_zero(p2):
    assert bracket(0.7 + 0.2j, 0, p2) == 1


def test_bracket_degree_one(p2):
    x, q, h = 1.7 - 0.4j, 0.9, 0.3
    want = (1 - h / x) / (1 - q / x) * (-cmath.sqrt(q) / cmath.sqrt(h))
    assert complex(bracket(x, 1, p2)) == pytest.approx(want)


@pytest.mark.parametrize("d", [-2, -1, 1, 3])
def test_bracket_against_infinite_products(d):
    # (y; q)_d = phi(y)/phi(q^d y) with phi truncated far past machine precision
    q, h = 0.5, 0.3
    p = make_params(1, (1.0,), h, q=q)
    x = 1.7 - 0.4j
    poch = lambda y: phi(y, q) / phi(q ** d * y, q)  # noqa: E731
    want = poch(h / x) / poch(q / x) * (-cmath.sqrt(q) / cmath.sqrt(h)) ** d
    assert complex(bracket(x, d, p)) == pytest.approx(want, rel=1e-12)


@given(st.integers(-4, 4), st.builds(complex, st.floats(0.5, 2), st.floats(-1, 1)))
def test_pochhammer_shift_rule(d, x):
    q = 0.7
    # (x; q)_{d+1} = (x; q)_d (1 - q^d x)
    assert abs(q_pochhammer(x, q, d + 1) - q_pochhammer(x, q, d) * (1 - q ** d * x)) < 1e-9 * max(
        1, abs(q_pochhammer(x, q, d + 1)))


def test_bracket_pole(p2):
    with pytest.raises(PoleHit):
        bracket(0.9, 1, p2)  # q/x = 1


# --- series -------------------------------------------------------------------

def test_single_site_first_coefficient():
    a, h, q = 1.3, 0.35, 0.8
    p = make_params(1, (a,), h, q=q)
    V = vertex_coefficient(1, ONE, 1, 0.0, q, p)
    step = -cmath.sqrt(q) / cmath.sqrt(h)
    assert complex(V.coeffs[0]) == pytest.approx(1)
    assert complex(V.coeffs[1]) == pytest.approx(cmath.sqrt(q) * (1 - h) / (1 - q) * step)


def test_constant_term_is_insertion(p2):
    V = vertex_coefficient(FixedPoint(0b10, 2), E1, 4, 0.0, 0.9, p2)
    assert complex(V.coeffs[0]) == pytest.approx(2.0)
    assert complex(V()) == pytest.approx(2.0)


def test_unit_insertion_ratio_is_one(p2):
    r, _, _ = vertex_ratio(1, ONE, 0.03, 0.9, 8, p2)
    assert r == pytest.approx(1)


def test_extraction_at_zero_is_exact(p2):
    ext = extract_eigenvalue(1, E1, 0, p2)
    assert ext.value == 1.0 and ext.error_estimate == 0


def test_negative_degree_rejected(p2):
    with pytest.raises(ValueError):
        vertex_coefficient(1, ONE, -1, 0.1, 0.9, p2)


# --- q -> 1 ---------------------------------------------------------------------

def test_two_site_extraction_matches_quadratic():
    a1, a2 = A_UNIT[:2]
    p = unit_params(2)
    z = 0.03
    roots = quadratic_roots(a1, a2, HBAR, z)
    for mask, a in ((0b01, a1), (0b10, a2)):
        want = min(roots, key=lambda r: abs(r - a))
        ext = extract_eigenvalue(mask, E1, z, p)
        assert abs(ext.value - want) < 1e-3


def test_extraction_stable_in_truncation():
    p = unit_params(2)
    e1 = extract_eigenvalue(1, E1, 0.03, p, d_max=12).value
    e2 = extract_eigenvalue(1, E1, 0.03, p, d_max=14).value
    assert abs(e1 - e2) < 1e-4


def test_extraction_matches_bethe_unit_family():
    p = unit_params(2)
    z = 0.05
    for sol in solve_all(BetheSystem(2, 1, p, "geometric", z)):
        ext = extract_eigenvalue(sol.origin, E1, z, p)
        assert abs(ext.value - complex(sol.roots[0])) < 1e-3


def test_ratio_trend_two_sites():
    spread, growth, tail = ratio_trend(FixedPoint(1, 2), E1, trend_z_default(2), unit_params(2))
    assert spread < 0.1
    assert growth > 10
    assert tail < 1e-9


def test_check_vertex_report():
    rep = check_vertex(unit_params(2), 0.05, 14, 1e-3)
    assert rep.passed, rep.table()
    assert np.isfinite(rep.max_residual("vertex: extraction"))
