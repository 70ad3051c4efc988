import numpy as np
import pytest
from hypothesis import given, strategies as st

from xxzqk.bethe import BetheSystem, solve_all
from xxzqk.core import GradedOperator, PowerSeries, elementary, make_params
from xxzqk.errors import ResonantZ
from xxzqk.qop import (
    RESOLVED, UniversalConvention, check_exterior_eigen, check_line_bundle, check_tq, check_wronskian, coeff_a,
    identify_q_with_exterior, minus_partners, normalization_F, q_minus_series, q_plus_series, quantum_exterior,
    quantum_line_bundle,
)

from conftest import quadratic_roots, unit_params


def by_value(vals):
    return sorted((complex(v) for v in vals), key=lambda v: (round(v.real, 8), v.imag))


# --- universal coefficients ---------------------------------------------------

def test_coeff_a_trivial_orders(p2):
    assert coeff_a(0, 0.2, p2, 1) == 1
    assert coeff_a(3, 0, p2, 2) == 0


def test_coeff_a_hand_values(p2):
    h, z = 0.3, 0.2
    tri = UniversalConvention(exponent="triangular")
    assert coeff_a(1, z, p2, 1, tri) == pytest.approx((h - 1) * h / (1 - h / z))
    assert coeff_a(1, z, p2, 1) == pytest.approx((h - 1) * h ** 0.5 / (1 - h / z))


def test_coeff_a_resonance(p2):
    with pytest.raises(ResonantZ):
        coeff_a(1, 0.3, p2, 1)


def test_coeff_a_rejects_negative_order(p2):
    with pytest.raises(ValueError):
        coeff_a(-1, 0.2, p2, 1)


def test_unknown_convention():
    with pytest.raises(ValueError):
        UniversalConvention(factorial="cubic")


# --- quantum exterior powers --------------------------------------------------

def test_exterior_zero_is_identity():
    p = unit_params(3)
    E = quantum_exterior(0, 0.2, p).operator
    assert (E - GradedOperator.identity(3)).absmax() < 1e-15


def test_exterior_classical_at_z_zero(p2):
    E = quantum_exterior(1, 0.0, p2).operator
    assert E.is_diagonal()
    assert complex(E.block(2)[0, 0]) == pytest.approx(3.0)
    np.testing.assert_allclose(np.diag(E.block(1)).astype(complex), [1.0, 2.0])


def test_exterior_two_site_spectrum(p2):
    z = 0.2
    got = by_value(quantum_exterior(1, z, p2).eigenvalues(1))
    want = by_value(quadratic_roots(1.0, 2.0, 0.3, z))
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_exterior_beyond_chain_is_zero():
    assert quantum_exterior(4, 0.2, unit_params(3)).operator.absmax() == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_exterior_spectrum_matches_bethe(n):
    p = unit_params(n)
    z = 0.3 - 0.1j
    for k in range(1, n + 1):
        sols = solve_all(BetheSystem(n, k, p, "geometric", z))
        for l in range(1, k + 1):
            got = by_value(quantum_exterior(l, z, p).eigenvalues(k))
            want = by_value(elementary([complex(s) for s in sol.roots], l) for sol in sols)
            np.testing.assert_allclose(got, want, atol=1e-9)


@given(st.builds(complex, st.floats(-0.4, 0.4), st.floats(-0.4, 0.4)).filter(lambda z: abs(z) > 0.02))
def test_exterior_powers_commute(z):
    p = unit_params(3)
    ops = [quantum_exterior(l, z, p).operator for l in range(1, 4)]
    for A in ops:
        for B in ops:
            assert A.commutator(B).absmax() < 1e-10 * max(1, A.absmax() * B.absmax())


# --- line bundle --------------------------------------------------------------

def test_line_bundle_classical(p2):
    L = quantum_line_bundle(0.0, p2).operator
    assert L.is_diagonal()
    assert complex(L.block(0)[0, 0]) == 1
    assert complex(L.block(2)[0, 0]) == pytest.approx(2.0)


def test_line_bundle_two_site_spectrum(p2):
    got = by_value(quantum_line_bundle(0.2, p2).eigenvalues(1))
    np.testing.assert_allclose(got, by_value(quadratic_roots(1.0, 2.0, 0.3, 0.2)), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_line_bundle_is_top_exterior(n):
    assert check_line_bundle(0.25, unit_params(n)).passed


# --- Q+ and Q- ----------------------------------------------------------------

def test_q_plus_leading_term():
    Q = q_plus_series(0.2, 0, unit_params(3)).series
    assert (Q[0] - GradedOperator.identity(3)).absmax() < 1e-15


def test_q_plus_classical(p2):
    Q = q_plus_series(0.0, 2, p2).series
    for m in range(3):
        assert Q[m].is_diagonal()
    # prod (1 - a x) over the subset
    np.testing.assert_allclose(np.diag(Q[1].block(1)).astype(complex), [-1.0, -2.0])
    assert complex(Q[2].block(2)[0, 0]) == pytest.approx(2.0)


@pytest.mark.parametrize("n", [2, 3])
def test_q_plus_spectrum_is_bethe(n):
    p = unit_params(n)
    z = 0.2
    W1 = q_plus_series(z, 1, p).series[1]
    for k in range(1, n + 1):
        sols = solve_all(BetheSystem(n, k, p, "aba", z))
        got = by_value(np.linalg.eigvals(np.asarray(W1.block(k), dtype=complex)))
        want = by_value(-sum(complex(s) for s in sol.roots) for sol in sols)
        np.testing.assert_allclose(got, want, atol=1e-10)


def test_normalization_F_low_orders():
    a, h = 0.8 - 0.3j, 0.35
    p = make_params(1, (a,), h)
    F = normalization_F(p, 3)
    assert F[0] == pytest.approx(1)
    assert complex(F[1]) == pytest.approx(-a / (1 + h))


def test_normalization_F_functional_equation():
    # coefficient-wise, so truncation plays no role
    p = unit_params(2)
    M = 6
    F = normalization_F(p, M)
    h = p.hbar_w
    lhs, rhs = F.rescale(1 / h ** 2), F
    for a in p.a_w:
        lhs = lhs * PowerSeries.of([1, -a / h] + [0] * (M - 1))
        rhs = rhs * PowerSeries.of([1, -a / h ** 2] + [0] * (M - 1))
    for m in range(M + 1):
        assert abs(lhs[m] - rhs[m]) < 1e-10 * max(1, abs(rhs[m]))


def test_q_minus_full_sector_is_constant():
    p = unit_params(2)
    Q = q_minus_series(0.2, 3, p).series
    for m in range(1, 4):
        assert np.max(np.abs(np.asarray(Q[m].block(2), dtype=complex))) < 1e-12


def test_minus_partners_cover_every_sector():
    p = unit_params(3)
    pairs = minus_partners(0.25, p)
    assert [len(pairs[k]) for k in range(4)] == [1, 3, 3, 1]


# --- relation suites ----------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_wronskian(n):
    rep = check_wronskian(0.2, 6, unit_params(n))
    assert rep.passed, rep.table()


def test_wronskian_branch_sabotage_fails():
    assert not check_wronskian(0.2, 6, unit_params(2), sabotage_branch=True).passed


@pytest.mark.parametrize("n", [1, 2])
def test_tq(n):
    rep = check_tq(0.25, [0.71 + 0.23j, 1.29 - 0.41j], 6, unit_params(n))
    assert rep.passed, rep.table()


@pytest.mark.parametrize("n", [2, 3])
def test_identify_q_plus(n):
    rep = identify_q_with_exterior(0.2, 3, unit_params(n))
    assert rep.passed, rep.table()


@pytest.mark.parametrize("n", [2, 3])
def test_exterior_eigen_report(n):
    rep = check_exterior_eigen(0.2, unit_params(n))
    assert rep.passed, rep.table()


def test_sabotaged_convention_fails():
    p = unit_params(3)
    assert not check_exterior_eigen(0.2, p, convention=RESOLVED.sabotaged()).passed


@pytest.mark.parametrize("conv", [UniversalConvention(factorial="square"),
                                  UniversalConvention(exponent="triangular")])
def test_other_conventions_fail_eigen_check(conv):
    assert not check_exterior_eigen(0.2, unit_params(3), convention=conv).passed
