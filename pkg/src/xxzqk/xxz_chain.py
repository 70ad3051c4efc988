"""L-operators, the twisted monodromy matrix and algebraic Bethe vectors.

Site i carries C^2 with basis nu0 (bit i clear) and nu1 (bit i set), so the
chain basis coincides with the fixed-point basis: the number of nu1's is the
sector index k.  On one site, with w = u / xi_i and t = hbar^{1/2}:

    L(w) = [[w t^{1/2} k - t^{-1/2} w^{-1} k^{-1},  f],
            [e,  t^{1/2} w k^{-1} - t^{-1/2} w^{-1} k]]

where k = diag(t^{1/2}, t^{-1/2}), f: nu0 -> t^{1/2}(t - 1/t) nu1 and
e: nu1 -> t^{-1/2}(t - 1/t) nu0.  T(u) = L_1(u/xi_1)...L_n(u/xi_n) diag(Z, 1/Z).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .core.params import ModelParams
from .core.scalars import norm2
from .core.space import GradedOperator
from .errors import InadmissibleRoots, PoleAtSpectralParameter, ZeroSpectralParameter

ADMISSIBILITY_TOL = 1e-8


@dataclass(frozen=True)
class Monodromy:
    u: Any
    Z: Any
    A: GradedOperator
    B: GradedOperator
    C: GradedOperator
    D: GradedOperator

    @property
    def trace(self) -> GradedOperator:
        return self.A + self.D


def _site_diagonals(w: Any, params: ModelParams) -> tuple[tuple[Any, Any], tuple[Any, Any]]:
    """Eigenvalues of L_00 and L_11 on (nu0, nu1)."""
    t = params.sqrt_hbar_w
    plain = w - 1 / w
    shifted = w * t - 1 / (w * t)
    return (shifted, plain), (plain, shifted)


def _dense_monodromy(u: Any, Z: Any, params: ModelParams) -> list[list[np.ndarray]]:
    n, ar = params.n, params.ar
    N = 1 << n
    t, q4 = params.sqrt_hbar_w, params.hbar_quarter_w
    c = t - 1 / t
    f_coef, e_coef = q4 * c, c / q4
    masks = np.arange(N)
    T = [[ar.eye(N), ar.zeros((N, N))], [ar.zeros((N, N)), ar.eye(N)]]
    for i in range(n):
        w = u / params.xi_w[i]
        (d00_0, d00_1), (d11_0, d11_1) = _site_diagonals(w, params)
        bit = 1 << i
        has = (masks & bit) != 0
        d00 = ar.array([d00_1 if h else d00_0 for h in has])
        d11 = ar.array([d11_1 if h else d11_0 for h in has])
        # (M f)[:, m] = f_coef * M[:, m | bit] for m without the bit
        # (M e)[:, m] = e_coef * M[:, m & ~bit] for m with the bit
        new = [[None, None], [None, None]]
        for r in range(2):
            left, right = T[r][0], T[r][1]
            col0 = left * d00
            shifted = ar.zeros((N, N))
            idx = masks[has]
            shifted[:, idx] = right[:, idx ^ bit] * e_coef
            col0 = col0 + shifted
            col1 = right * d11
            shifted = ar.zeros((N, N))
            idx = masks[~has]
            shifted[:, idx] = left[:, idx | bit] * f_coef
            col1 = col1 + shifted
            new[r] = [col0, col1]
        T = new
    Zi = 1 / Z
    return [[T[0][0] * Z, T[0][1] * Zi], [T[1][0] * Z, T[1][1] * Zi]]


def build_monodromy(u: Any, Z: Any, params: ModelParams) -> Monodromy:
    """Twisted monodromy matrix with entries as graded operators."""
    ar = params.ar
    u, Z = ar.c(u), ar.c(Z)
    if u == 0:
        raise ZeroSpectralParameter("the monodromy matrix is singular at u = 0")
    T = _dense_monodromy(u, Z, params)
    n = params.n
    return Monodromy(
        u, Z,
        GradedOperator.from_dense(T[0][0], n, 0, ar),
        GradedOperator.from_dense(T[0][1], n, 1, ar),
        GradedOperator.from_dense(T[1][0], n, -1, ar),
        GradedOperator.from_dense(T[1][1], n, 0, ar),
    )


def transfer(u: Any, Z: Any, params: ModelParams) -> GradedOperator:
    """tr T(u) = A(u) + D(u)."""
    return build_monodromy(u, Z, params).trace


def check_admissible(roots: Sequence[Any], params: ModelParams, tol: float = ADMISSIBILITY_TOL) -> None:
    h = params.hbar_w
    for i, si in enumerate(roots):
        for j, sj in enumerate(roots):
            if i == j:
                continue
            scale = max(abs(si), abs(sj))
            for target in (sj, h * sj, sj / h):
                if abs(si - target) <= tol * max(scale, abs(target)):
                    raise InadmissibleRoots(f"roots {i} and {j} violate s_i != s_j, hbar^(+-1) s_j")


@dataclass(frozen=True)
class BetheVector:
    """B(v_1)...B(v_k) Omega_+ (plus side) or C(v_1)...C(v_k) Omega_- (minus side)."""

    roots: tuple[Any, ...]
    v: tuple[Any, ...]
    side: str
    sector: int
    vector: np.ndarray
    normalization: str = "raw"

    def normalized(self) -> np.ndarray:
        return np.asarray(self.vector, dtype=np.complex128) / norm2(self.vector)


def bethe_vector(roots: Sequence[Any], Z: Any, params: ModelParams, side: str = "plus") -> BetheVector:
    """Algebraic Bethe vector with v_i the principal square roots of s_i."""
    if side not in ("plus", "minus"):
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
    ar, n = params.ar, params.n
    roots = tuple(ar.c(s) for s in roots)
    if len(roots) > n:
        raise InadmissibleRoots(f"{len(roots)} roots exceed the chain length {n}")
    check_admissible(roots, params)
    v = tuple(ar.sqrt(s) for s in roots)
    if side == "plus":
        k, step = 0, 1
    else:
        k, step = n, -1
    vec = ar.array([1])
    for vi in v:
        mono = build_monodromy(vi, Z, params)
        op = mono.B if side == "plus" else mono.C
        vec = op.apply(k, vec)
        k += step
    return BetheVector(roots, v, side, k, vec)


def vacuum_eigenvalues(u: Any, Z: Any, params: ModelParams) -> tuple[Any, Any]:
    """alpha(u), delta(u): eigenvalues of A and D on Omega_+."""
    t = params.sqrt_hbar_w
    alpha, delta = Z, 1 / Z
    for xi in params.xi_w:
        alpha = alpha * (u / xi * t - xi / (u * t))
        delta = delta * (u / xi - xi / u)
    return alpha, delta


def transfer_eigenvalue(u: Any, roots: Sequence[Any], Z: Any, params: ModelParams,
                        pole_tol: float = 1e-12) -> Any:
    """Lambda(u | v, Z) for Bethe roots s_i = v_i^2."""
    ar = params.ar
    u, Z = ar.c(u), ar.c(Z)
    if u == 0:
        raise ZeroSpectralParameter("u = 0")
    t = params.sqrt_hbar_w
    alpha, delta = vacuum_eigenvalues(u, Z, params)
    p1 = p2 = ar.c(1)
    for s in roots:
        vi = ar.sqrt(ar.c(s))
        den = vi / u - u / vi
        if abs(den) <= pole_tol * (abs(vi / u) + abs(u / vi)):
            raise PoleAtSpectralParameter(f"u^2 = {complex(s)} is a Bethe root")
        p1 = p1 * (vi / u * t - u / (vi * t)) / den
        p2 = p2 * (u / vi * t - vi / (u * t)) / (-den)
    return alpha * p1 + delta * p2


def eigen_residual(op: GradedOperator, k: int, vec: np.ndarray, value: Any) -> float:
    """||op v - value v|| / ||v|| for v in sector k."""
    return norm2(op.apply(k, vec) - vec * value) / norm2(vec)


def commutator_ratio(t1: GradedOperator, t2: GradedOperator) -> float:
    """max-entry of [t1, t2] relative to the larger max-entry of t1, t2."""
    return t1.commutator(t2).absmax() / max(t1.absmax(), t2.absmax())


__all__ = [
    "BetheVector", "Monodromy", "bethe_vector", "build_monodromy", "check_admissible", "commutator_ratio",
    "check_transfer", "eigen_residual", "random_spectral_points", "transfer", "transfer_eigenvalue",
    "vacuum_eigenvalues",
]


def random_spectral_points(count: int, seed: int = 0) -> list[complex]:
    """Spectral parameters with modulus in [0.6, 1.6] and a random phase."""
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.6, 1.6, count)
    phi = rng.uniform(0, 2 * np.pi, count)
    return [complex(x) for x in r * np.exp(1j * phi)]


def check_transfer(params: ModelParams, z_values: Sequence[Any] = (0.1, 0.3), pairs: int = 10, seed: int = 0,
                   tol_commute: float = 1e-11, tol_eigen: float = 1e-8, eigen_points: int = 3,
                   sectors: Sequence[int] | None = None, solutions: Any = None, control: Any = None):
    """Commuting transfer matrices and the algebraic Bethe ansatz eigenvalue theorem.

    ``solutions(k, z)`` may supply "aba" SolutionSets; otherwise they are solved.
    The Bethe vectors of each sector must also span it (Gram rank = C(n, k)).
    """
    import time
    from math import comb

    from .bethe import BetheSystem, solve_all
    from .core.linalg import gram_rank
    from .report import VerificationReport

    start = time.perf_counter()
    n, ar = params.n, params.ar
    rep = VerificationReport("transfer")
    us = random_spectral_points(2 * pairs + eigen_points, seed)
    for z in z_values:
        Z = ar.sqrt(ar.c(z))
        worst = 0.0
        for i in range(pairs):
            t1, t2 = transfer(us[2 * i], Z, params), transfer(us[2 * i + 1], Z, params)
            worst = max(worst, commutator_ratio(t1, t2))
        rep.add(f"transfer: commuting pairs z={complex(z):.4g}", "transfer matrices commute", worst, tol_commute)
        eig_u = us[2 * pairs:]
        trs = [transfer(u, Z, params) for u in eig_u]
        worst_eig = 0.0
        rank_short = 0
        for k in (sectors if sectors is not None else range(n + 1)):
            sset = solutions(k, z) if solutions else solve_all(BetheSystem(n, k, params, "aba", z), control)
            vecs = []
            for sol in sset.solutions:
                vec = bethe_vector(sol.roots, Z, params, "plus").vector
                vecs.append(vec)
                for u, t in zip(eig_u, trs):
                    lam = transfer_eigenvalue(u, sol.roots, Z, params)
                    worst_eig = max(worst_eig, eigen_residual(t, k, vec, lam) / max(1.0, float(abs(lam))))
            rank_short = max(rank_short, comb(n, k) - gram_rank(vecs))
        rep.add(f"transfer: Bethe eigenvectors z={complex(z):.4g}", "algebraic Bethe ansatz eigenvalue theorem",
                worst_eig, tol_eigen)
        rep.add(f"transfer: Gram rank deficit z={complex(z):.4g}", "Bethe vectors form a basis of each sector",
                float(rank_short), 0.0)
    rep.metadata.update({"n": n, "params_hash": params.digest(), "seed": seed, "pairs": pairs})
    rep.wall_time = time.perf_counter() - start
    return rep
