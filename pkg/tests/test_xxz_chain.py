import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xxzqk.bethe import BetheSystem, solve_all
from xxzqk.core import make_params, norm2
from xxzqk.errors import InadmissibleRoots, PoleAtSpectralParameter, ZeroSpectralParameter
from xxzqk.uq_action import op_K
from xxzqk.xxz_chain import (
    bethe_vector, build_monodromy, check_transfer, commutator_ratio, eigen_residual, random_spectral_points,
    transfer, transfer_eigenvalue, vacuum_eigenvalues,
)

from conftest import unit_params

spectral = st.builds(lambda r, phi: r * cmath.exp(1j * phi), st.floats(0.6, 1.6), st.floats(0, 6.28))


def test_single_site_monodromy_by_hand():
    a1, h, u, Z = 1.3, 0.35, 0.8 + 0.4j, 0.7 - 0.2j
    p = make_params(1, (a1,), h)
    T = build_monodromy(u, Z, p)
    t, xi = cmath.sqrt(h), cmath.sqrt(a1)
    w = u / xi
    shifted, plain = w * t - 1 / (w * t), w - 1 / w
    c, q4 = t - 1 / t, cmath.sqrt(t)
    np.testing.assert_allclose(np.diag(T.A.block(0)), [shifted * Z])
    np.testing.assert_allclose(np.diag(T.A.block(1)), [plain * Z])
    np.testing.assert_allclose(np.diag(T.D.block(0)), [plain / Z])
    np.testing.assert_allclose(np.diag(T.D.block(1)), [shifted / Z])
    np.testing.assert_allclose(T.B.block(0), [[q4 * c / Z]])
    np.testing.assert_allclose(T.C.block(1), [[c / q4 * Z]])


def test_single_site_trace_untwisted():
    a1, h, u = 0.9, 0.35, 1.1 + 0.3j
    p = make_params(1, (a1,), h)
    tr = transfer(u, 1.0, p)
    t, w = cmath.sqrt(h), u / cmath.sqrt(a1)
    total = (w * t - 1 / (w * t)) + (w - 1 / w)
    np.testing.assert_allclose(tr.block(0), [[total]])
    np.testing.assert_allclose(tr.block(1), [[total]])


def test_zero_spectral_parameter():
    with pytest.raises(ZeroSpectralParameter):
        build_monodromy(0, 1.0, unit_params(2))


def test_grading_of_entries():
    T = build_monodromy(0.9 + 0.2j, 0.5, unit_params(3))
    assert (T.A.shift, T.B.shift, T.C.shift, T.D.shift) == (0, 1, -1, 0)
    assert 3 not in T.B.blocks
    assert 0 not in T.C.blocks


def test_transfer_commutes_with_K_untwisted():
    p = unit_params(4)
    tr = transfer(0.77 - 0.41j, 1.0, p)
    assert tr.commutator(op_K(p)).absmax() < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_transfer_family_commutes(n):
    p = unit_params(n)
    Z = cmath.sqrt(0.3)
    us = random_spectral_points(20, seed=n)
    for u1, u2 in zip(us[::2], us[1::2]):
        assert commutator_ratio(transfer(u1, Z, p), transfer(u2, Z, p)) < 1e-11


@given(spectral)
def test_vacuum_eigenvalue(u):
    p = unit_params(3)
    Z = 0.6 + 0.1j
    alpha, delta = vacuum_eigenvalues(u, Z, p)
    tr = transfer(u, Z, p)
    vac = np.array([1.0 + 0j])
    assert norm2(tr.apply(0, vac) - (alpha + delta) * vac) < 1e-10 * max(1, abs(alpha + delta))
    assert transfer_eigenvalue(u, (), Z, p) == pytest.approx(alpha + delta)


def test_bethe_vector_empty_and_single_site():
    p = make_params(1, (1.3,), 0.35)
    Z = 0.8
    assert np.allclose(bethe_vector((), Z, p).vector, [1])
    bv = bethe_vector((0.7,), Z, p)
    t = cmath.sqrt(0.35)
    assert bv.sector == 1
    np.testing.assert_allclose(bv.vector, [cmath.sqrt(t) * (t - 1 / t) / Z])


def test_inadmissible_roots():
    p = unit_params(3)
    with pytest.raises(InadmissibleRoots):
        bethe_vector((0.5, 0.5), 1.0, p)
    with pytest.raises(InadmissibleRoots):
        bethe_vector((0.5, 0.5 * 0.35), 1.0, p)


def test_eigenvalue_pole():
    with pytest.raises(PoleAtSpectralParameter):
        transfer_eigenvalue(cmath.sqrt(0.49), (0.49,), 1.0, unit_params(2))


def test_bethe_vectors_are_eigenvectors():
    p = unit_params(4)
    z = 0.2
    Z = cmath.sqrt(z)
    sols = solve_all(BetheSystem(4, 2, p, "aba", z))
    assert len(sols) == 6
    for u in random_spectral_points(3, seed=7):
        tr = transfer(u, Z, p)
        for sol in sols:
            vec = bethe_vector(sol.roots, Z, p).vector
            lam = transfer_eigenvalue(u, sol.roots, Z, p)
            assert eigen_residual(tr, 2, vec, lam) < 1e-8 * max(1, abs(lam))


def test_random_roots_are_not_eigenvectors():
    p = unit_params(3)
    Z = cmath.sqrt(0.2)
    roots = (0.4 + 0.3j, -0.7 + 0.5j)
    u = 1.1 + 0.2j
    lam = transfer_eigenvalue(u, roots, Z, p)
    vec = bethe_vector(roots, Z, p).vector
    assert eigen_residual(transfer(u, Z, p), 2, vec, lam) > 1e-3 * abs(lam)


@given(st.tuples(spectral, spectral).filter(lambda s: abs(s[0] - s[1]) > 0.1))
def test_creation_operators_commute_projectively(pair):
    s1, s2 = pair
    p = unit_params(3)
    try:
        v12 = bethe_vector((s1, s2), 0.7, p).vector
        v21 = bethe_vector((s2, s1), 0.7, p).vector
    except InadmissibleRoots:
        return
    v12, v21 = v12 / norm2(v12), v21 / norm2(v21)
    overlap = abs(np.vdot(v12, v21))
    assert abs(overlap - 1) < 1e-10


def test_site_value_is_finite_on_bethe_roots():
    p = unit_params(3)
    z = 0.25
    Z = cmath.sqrt(z)
    for sol in solve_all(BetheSystem(3, 1, p, "aba", z)):
        lam = transfer_eigenvalue(p.xi_w[0], sol.roots, Z, p)
        assert np.isfinite(complex(lam))


def test_check_transfer_report():
    rep = check_transfer(unit_params(3), (0.1, 0.3))
    assert rep.passed, rep.table()
    assert len(rep.entries) == 6
