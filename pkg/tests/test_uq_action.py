import cmath
import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xxzqk.core import make_params
from xxzqk.errors import NearSingularDenominator, ZeroMode
from xxzqk.uq_action import (
    check_drinfeld, op_E, op_F, op_H, op_K, op_K_inv, psi_series, quantum_integer,
)

from conftest import unit_params


def diag_of(op, k, i):
    return complex(op.block(k)[i, i])


# --- K and H ------------------------------------------------------------------

def test_K_eigenvalues():
    p = make_params(2, (1, 2), 0.3)
    K = op_K(p)
    assert diag_of(K, 1, 0) == pytest.approx(1)
    assert diag_of(K, 0, 0) == pytest.approx(0.3)
    # principal branch of 4^{1/2}
    assert diag_of(op_K(make_params(1, (1.5,), 4.0)), 0, 0) == pytest.approx(2)


def test_K_times_K_inv():
    p = unit_params(3)
    assert (op_K(p) @ op_K_inv(p) - op_K(p).identity(3)).absmax() < 1e-15


def test_H_single_site_empty_set():
    h, a1 = 0.3, 1.7
    p = make_params(1, (a1,), h)
    assert diag_of(op_H(1, p), 0, 0) == pytest.approx(h ** -0.5 / a1)


def test_H_full_set():
    a, h = (1.0, 2.0, 3.5), 0.3
    p = make_params(3, a, h)
    assert diag_of(op_H(1, p), 3, 0) == pytest.approx(-h ** 0.5 * sum(1 / x for x in a))


def test_H_hand_value():
    # n=2, m=2, p={1}, a=(1,2), hbar=0.25: t = 1/2, [2]_t = t + 1/t = 5/2
    p = make_params(2, (1, 2), 0.25)
    t = 0.5
    expected = (2.5 / 2) * (t ** -2 * 2 ** -2 - t ** 2 * 1 ** -2)
    assert diag_of(op_H(2, p), 1, 0) == pytest.approx(expected)


def test_H_zero_mode():
    with pytest.raises(ZeroMode):
        op_H(0, make_params(1, (1,), 0.3))


@given(st.integers(1, 6))
def test_quantum_integer_symmetric(m):
    t = 0.7 + 0.2j
    assert abs(quantum_integer(m, t) - quantum_integer(m, 1 / t)) < 1e-12
    assert abs(quantum_integer(m, t) - sum(t ** (m - 1 - 2 * j) for j in range(m))) < 1e-12


# --- E and F ------------------------------------------------------------------

def test_E_F_vanish_at_edges():
    p = unit_params(3)
    for r in (-1, 0, 2):
        assert 0 not in op_E(r, p).blocks or op_E(r, p).block(0).size == 0
        assert 3 not in op_F(r, p).blocks


def test_single_site_E0_F0():
    a1, h = 1.7, 0.3
    p = make_params(1, (a1,), h)
    # E_0 O_{1} = a1^{-1} O_empty, F_0 O_empty = hbar^0 a1 O_{1}
    assert complex(op_E(0, p).block(1)[0, 0]) == pytest.approx(1 / a1)
    assert complex(op_F(0, p).block(0)[0, 0]) == pytest.approx(a1)
    # [E_0, F_0] = (psi+_0 - psi-_0)/(t - 1/t) = (K - K^{-1})/(t - 1/t)
    E, F, K, Ki = op_E(0, p), op_F(0, p), op_K(p), op_K_inv(p)
    t = cmath.sqrt(h)
    lhs = E @ F - F @ E
    rhs = (K - Ki).scale(1 / (t - 1 / t))
    assert (lhs - rhs).absmax() < 1e-12


@pytest.mark.parametrize("m, l", [(0, 0), (1, -1), (-1, 1), (1, 0), (0, 1), (2, -1), (-1, 2)])
def test_single_site_EF_relation(m, l):
    p = make_params(1, (0.8 - 0.3j,), 0.35)
    t = cmath.sqrt(0.35)
    plus, minus = psi_series(p, 2)
    s = m + l
    lhs = op_E(m, p) @ op_F(l, p) - op_F(l, p) @ op_E(m, p)
    rhs = (plus[s] - (minus[0] if s == 0 else minus[0].scale(0))).scale(1 / (t - 1 / t))
    assert (lhs - rhs).absmax() < 1e-12


def test_near_singular_denominator():
    # accepted at construction with a tiny tolerance, rejected by a stricter generator guard
    p = make_params(2, (1.0, 1.0 + 1e-5), 0.3, genericity_tol=1e-6)
    p = dataclasses.replace(p, genericity_tol=1e-3)
    with pytest.raises(NearSingularDenominator):
        op_E(0, p)


# --- psi ----------------------------------------------------------------------

def test_psi_zero_order():
    p = unit_params(2)
    plus, minus = psi_series(p, 0)
    assert (plus[0] - op_K(p)).absmax() == 0
    assert (minus[0] - op_K_inv(p)).absmax() == 0


def test_psi_first_order():
    p = unit_params(3)
    t = p.sqrt_hbar_w
    plus, _ = psi_series(p, 1)
    assert (plus[1] - (op_K(p) @ op_H(1, p)).scale(t - 1 / t)).absmax() < 1e-14


# --- the relation suite -------------------------------------------------------

def test_drinfeld_single_site_tight():
    rep = check_drinfeld(unit_params(1), 2, 1e-12)
    assert rep.passed, rep.table()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_drinfeld_passes(n):
    rep = check_drinfeld(unit_params(n), 2, 1e-10)
    assert rep.passed, rep.table()


def test_drinfeld_real_characters():
    rep = check_drinfeld(make_params(4, (1.0, 1.3, 1.7, 2.1), 0.35), 2, 1e-10)
    assert rep.passed, rep.table()


def test_drinfeld_high_precision():
    rep = check_drinfeld(unit_params(3, precision=256), 2, 1e-30)
    assert rep.passed, rep.table()


def test_drinfeld_sign_sabotage_fails():
    rep = check_drinfeld(unit_params(3), 2, 1e-10, sabotage_sign=True)
    assert not rep.passed


@given(st.integers(-2, 2), st.integers(1, 4))
def test_grading_and_diagonality(r, n):
    p = unit_params(n)
    assert op_E(r, p).shift == -1 and op_F(r, p).shift == 1
    if r:
        assert op_H(r, p).is_diagonal()
    K = op_K(p)
    lhs = K @ op_E(r, p) @ op_K_inv(p)
    assert (lhs - op_E(r, p).scale(p.hbar_w)).absmax() < 1e-10 * max(1, op_E(r, p).absmax())


def test_H_commute_exactly():
    p = unit_params(3)
    for m in (-2, -1, 1, 2):
        for l in (-2, -1, 1, 2):
            assert op_H(m, p).commutator(op_H(l, p)).absmax() == 0


def test_generators_at_random_characters():
    rng = np.random.default_rng(3)
    for _ in range(3):
        a = tuple(np.exp(1j * np.sort(rng.uniform(0, 2 * np.pi, 3))) * rng.uniform(0.8, 1.2, 3))
        rep = check_drinfeld(make_params(3, a, 0.4 + 0.1j), 1, 1e-9)
        assert rep.passed, rep.table()
