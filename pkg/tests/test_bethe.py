import cmath
import random
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xxzqk.bethe import (
    CONVENTIONS, BetheSystem, SolutionSet, StepControl, canonical_sort, classical_solutions, continue_solution,
    load_solutions, relative_residual, residual, save_solutions, solve_all, symmetric_eval,
)
from xxzqk.core import SymmetricFunctionSpec, gram_rank, make_params
from xxzqk.errors import IncompleteSet, PoleHit
from xxzqk.xxz_chain import bethe_vector

from conftest import quadratic_roots, unit_params


def closed_form_single(a1, hbar, z):
    return a1 * (1 + z * cmath.sqrt(hbar)) / (1 + z / cmath.sqrt(hbar))


def test_residual_vanishes_on_subsets_at_zero():
    p = unit_params(4)
    for conv in CONVENTIONS:
        sys = BetheSystem(4, 2, p, conv, 0.0)
        for roots in classical_solutions(4, 2, p) if conv != "aba_minus" else []:
            assert residual(roots, sys).max_cleared() == 0


def test_residual_single_site_closed_form():
    p = make_params(1, (1.3,), 0.35)
    z = 0.4 - 0.1j
    s = closed_form_single(1.3, 0.35, z)
    res = residual((s,), BetheSystem(1, 1, p, "geometric", z))
    assert res.max_cleared() < 1e-14
    assert res.max_log() < 1e-14


def test_residual_random_roots_nonzero():
    p = unit_params(3)
    res = residual((0.3 + 0.2j, -0.4 + 0.9j), BetheSystem(3, 2, p, "geometric", 0.2))
    assert res.max_cleared() > 1e-3


def test_residual_pole():
    p = make_params(2, (1.0, 2.0), 0.3)
    with pytest.raises(PoleHit):
        residual((0.3,), BetheSystem(2, 1, p, "geometric", 0.2))


def test_classical_solutions():
    p = make_params(2, (1.0, 2.0), 0.3)
    assert classical_solutions(2, 1, p) == [(1.0,), (2.0,)]
    assert len(classical_solutions(4, 2, unit_params(4))) == 6
    assert classical_solutions(3, 0, unit_params(3)) == [()]


def test_continue_to_zero_is_identity():
    p = unit_params(3)
    sol = continue_solution(0b101, 0.0, BetheSystem(3, 2, p, "geometric", 0.2))
    assert sol.roots == canonical_sort((p.a_w[0], p.a_w[2]))
    assert sol.path_steps == 0


@given(st.builds(complex, st.floats(-0.5, 0.5), st.floats(-0.5, 0.5)))
@settings(max_examples=15)
def test_single_site_continuation_matches_closed_form(z):
    p = make_params(1, (1.3,), 0.35)
    sol = continue_solution(1, z, BetheSystem(1, 1, p, "geometric", z))
    assert abs(sol.roots[0] - closed_form_single(1.3, 0.35, z)) < 1e-12


def test_two_site_matches_quadratic():
    a1, a2, h, z = 1.0, 2.0, 0.3, 0.2
    p = make_params(2, (a1, a2), h)
    sset = solve_all(BetheSystem(2, 1, p, "geometric", z))
    got = sorted((complex(s.roots[0]) for s in sset), key=lambda v: (v.real, v.imag))
    want = sorted(quadratic_roots(a1, a2, h, z), key=lambda v: (v.real, v.imag))
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_solve_all_end_to_end():
    p = make_params(4, (1.0, 1.3, 1.7, 2.1), 0.35)
    z = 0.2
    sset = solve_all(BetheSystem(4, 2, p, "aba", z))
    assert len(sset) == 6 and sset.complete
    vecs = [bethe_vector(s.roots, cmath.sqrt(z), p).vector for s in sset]
    assert gram_rank(vecs) == 6


def test_solve_all_trivial_sectors():
    p = unit_params(3)
    assert len(solve_all(BetheSystem(3, 3, p, "geometric", 0.3))) == 1
    assert len(solve_all(BetheSystem(3, 0, p, "geometric", 0.3))) == 1
    zero = solve_all(BetheSystem(3, 2, p, "geometric", 0.0))
    assert {s.roots for s in zero} == {canonical_sort(r) for r in classical_solutions(3, 2, p)}


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("z", [0.2, -0.5, 0.5j])
def test_completeness(n, z):
    p = unit_params(n)
    for k in range(n + 1):
        for conv in ("geometric", "aba"):
            sset = solve_all(BetheSystem(n, k, p, conv, z))
            assert len(sset) == comb(n, k)
            assert all(relative_residual(s.roots, BetheSystem(n, k, p, conv, z)) < 1e-10 for s in sset)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_convention_equivalence(n):
    # geometric at (hbar, z) is aba at (1/hbar, (-1)^n z)
    p = unit_params(n)
    z = 0.3 - 0.1j
    inv = p.with_inverse_hbar()
    for k in range(n + 1):
        for sol in solve_all(BetheSystem(n, k, p, "geometric", z)):
            res = residual(sol.roots, BetheSystem(n, k, inv, "aba", (-1) ** n * z))
            assert res.max_log() < 1e-9


def test_zero_limit_continuity():
    p = unit_params(3)
    z = 1e-4
    for sol in solve_all(BetheSystem(3, 2, p, "geometric", z)):
        origin = canonical_sort(p.a_w[i] for i in range(3) if sol.origin >> i & 1)
        dev = max(abs(a - b) / abs(b) for a, b in zip(sol.roots, origin))
        assert dev < 1e-3


def test_shuffled_origins_give_same_multisets():
    p = unit_params(4)
    sys = BetheSystem(4, 2, p, "geometric", 0.3)
    key = lambda r: [(complex(x).real, complex(x).imag) for x in r]  # noqa: E731
    ref = sorted((s.roots for s in solve_all(sys)), key=key)
    masks = [m for m in range(16) if bin(m).count("1") == 2]
    random.Random(5).shuffle(masks)
    again = sorted((s.roots for s in solve_all(sys, origins=masks)), key=key)
    for r1, r2 in zip(ref, again):
        np.testing.assert_allclose(np.array(r1, dtype=complex), np.array(r2, dtype=complex), atol=1e-10)


def test_incomplete_set_reports_partial():
    p = unit_params(3)
    # a step budget far too small to reach z forces every path to fail
    ctl = StepControl(max_steps=2, initial_step=1e-3)
    with pytest.raises(IncompleteSet) as info:
        solve_all(BetheSystem(3, 1, p, "geometric", 0.4), ctl)
    assert isinstance(info.value.partial, SolutionSet)


def test_high_precision_solutions():
    p = unit_params(3, precision=256)
    sset = solve_all(BetheSystem(3, 1, p, "geometric", 0.2))
    for sol in sset:
        assert relative_residual(sol.roots, BetheSystem(3, 1, p, "geometric", 0.2)) < 1e-60


def test_symmetric_eval():
    roots = (0.5, 2.0 + 1j)
    assert symmetric_eval(SymmetricFunctionSpec.elementary(1), roots[:1]) == 0.5
    assert symmetric_eval(SymmetricFunctionSpec.elementary(2), roots) == pytest.approx(0.5 * (2 + 1j))
    x = 0.3
    assert symmetric_eval(SymmetricFunctionSpec.weighted_exterior(x), roots) == pytest.approx(
        (1 + x * 0.5) * (1 + x * (2 + 1j)))


@pytest.mark.parametrize("bits", [53, 256])
def test_cache_roundtrip(tmp_path, bits):
    p = unit_params(3, precision=bits)
    sets = [solve_all(BetheSystem(3, k, p, "aba", 0.25)) for k in range(4)]
    path = tmp_path / "roots.qks"
    save_solutions(str(path), sets, p)
    header, back = load_solutions(str(path), p)
    assert header["params_hash"] == p.digest()
    by_k = {s.k: s for s in back}
    for s in sets:
        for a, b in zip(s.solutions, by_k[s.k].solutions):
            assert a.roots == b.roots
            assert a.origin == b.origin
    # a second write is byte-identical
    path2 = tmp_path / "again.qks"
    save_solutions(str(path2), back, p)
    assert path.read_text() == path2.read_text()


def test_cache_rejects_other_params(tmp_path):
    p = unit_params(2)
    path = tmp_path / "roots.qks"
    save_solutions(str(path), [solve_all(BetheSystem(2, 1, p, "aba", 0.2))], p)
    with pytest.raises(ValueError):
        load_solutions(str(path), unit_params(2, hbar=0.4))
