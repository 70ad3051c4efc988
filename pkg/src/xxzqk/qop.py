"""Quantum tautological classes and Baxter Q-operators.

The quantum exterior powers are built from the universal formula

    Lambda-hat^l(z) = sum_m a_m(z) F_0^m Lambda^{l-m} E_{-1}^m,

with sector-scalar coefficients a_m(z) and the geometric generators at hbar.
Q_+ for a chain with anisotropy hbar is the x-series whose coefficients
W^Z_m have the same shape with the generators taken at 1/hbar.  Q_- is
obtained by spectral synthesis from the Bethe solutions.

Coefficient conventions (factorial and hbar exponent) are data: the resolved
choice is frozen in ``RESOLVED`` and a perturbed copy serves as a negative
control.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from math import comb
from typing import Any, Sequence

import numpy as np

from .bethe import BetheSystem, SolutionSet, StepControl, solve_all
from .core.linalg import inverse, null_vector
from .core.params import ModelParams
from .core.scalars import norm2
from .core.series import OperatorSeries, PowerSeries, q_pochhammer_inverse_series, q_pochhammer_series
from .core.space import GradedOperator, enumerate_fixed_points
from .core.symfun import elementary
from .errors import IncompleteSet, ResonantZ
from .report import VerificationReport
from .uq_action import op_E, op_F, quantum_integer
from .xxz_chain import bethe_vector, build_monodromy, transfer_eigenvalue

RESONANCE_TOL = 1e-6
FACTORIALS = ("round", "square")
EXPONENTS = ("half_square", "triangular")


@dataclass(frozen=True)
class UniversalConvention:
    """Normalization of the universal coefficients.

    factorial: "round" uses (m)_h! with (m)_h = (1 - h^m)/(1 - h), "square"
    the symmetric [m]_h!.  exponent: "half_square" uses h^{m^2/2},
    "triangular" h^{m(m+1)/2}.  ``perturbation`` rescales every m >= 1
    coefficient by (1 + perturbation) and exists only as a negative control.
    """

    factorial: str = "round"
    exponent: str = "half_square"
    perturbation: float = 0.0

    def __post_init__(self) -> None:
        if self.factorial not in FACTORIALS:
            raise ValueError(f"unknown factorial convention {self.factorial!r}")
        if self.exponent not in EXPONENTS:
            raise ValueError(f"unknown exponent convention {self.exponent!r}")

    def sabotaged(self, perturbation: float = 1e-3) -> "UniversalConvention":
        return replace(self, perturbation=perturbation)


RESOLVED = UniversalConvention()


def _factorial(m: int, h: Any, sqrt_h: Any, kind: str) -> Any:
    out = 1 + 0 * h
    for i in range(1, m + 1):
        if kind == "round":
            out = out * (1 - h ** i) / (1 - h)
        else:
            out = out * quantum_integer(i, sqrt_h)
    return out


def _h_power(m: int, h: Any, sqrt_h: Any, kind: str) -> Any:
    if kind == "half_square":
        return sqrt_h ** (m * m)
    return h ** (m * (m + 1) // 2)


def _resonance_product(m: int, step: Any, ratio: Any, what: str) -> Any:
    """prod_{i=1}^m (1 - ratio step^i), raising ResonantZ near a zero."""
    out = 1 + 0 * ratio
    for i in range(1, m + 1):
        d = 1 - ratio * step ** i
        if abs(d) <= RESONANCE_TOL:
            raise ResonantZ(f"{what}: factor i={i} is {complex(d):.3g}")
        out = out * d
    return out


def coeff_a(m: int, z: Any, params: ModelParams, k: int,
            convention: UniversalConvention = RESOLVED) -> Any:
    """a_m(z) on sector k, with K = hbar^{(n-2k)/2}."""
    if m < 0:
        raise ValueError("m must be non-negative")
    ar = params.ar
    if m == 0:
        return ar.c(1)
    z = ar.c(z)
    if z == 0:
        return ar.c(0)
    h, t = params.hbar_w, params.sqrt_hbar_w
    K = params.sector_K(k)
    sign = (-1) ** params.n
    den = _factorial(m, h, t, convention.factorial) * _resonance_product(m, h, sign * K / z, "a_m(z)")
    val = (h - 1) ** m * _h_power(m, h, t, convention.exponent) * K ** m / den
    return val * (1 + convention.perturbation)


def coeff_c(j: int, z: Any, params: ModelParams, k: int,
            convention: UniversalConvention = RESOLVED) -> Any:
    """Coefficient of F_0^j W_{m-j} E_{-1}^j in W^Z_m for a chain at hbar, z = Z^2.

    (1 - hbar^{-1})^j hbar^{-j^2/2} K^{-j} / ((j)_{1/hbar}! prod_i (1 - hbar^{-i} K^{-1} Z^{-2}))
    """
    ar = params.ar
    if j == 0:
        return ar.c(1)
    z = ar.c(z)
    if z == 0:
        return ar.c(0)
    hi, ti = 1 / params.hbar_w, 1 / params.sqrt_hbar_w
    K = params.sector_K(k)
    den = _factorial(j, hi, ti, convention.factorial) * _resonance_product(j, hi, 1 / (K * z), "W^Z coefficient")
    val = (1 - hi) ** j * _h_power(j, hi, ti, convention.exponent) * K ** (-j) / den
    return val * (1 + convention.perturbation)


@dataclass(frozen=True)
class QuantumClassOperator:
    label: str
    l: int | None
    z: Any
    operator: GradedOperator
    provenance: str = "combinatorial_formula"

    def block(self, k: int) -> np.ndarray:
        return self.operator.block(k)

    def eigenvalues(self, k: int) -> np.ndarray:
        return np.linalg.eigvals(np.asarray(self.block(k), dtype=np.complex128))


def classical_exterior(l: int, params: ModelParams) -> GradedOperator:
    """Diagonal Lambda^l: e_l of the subset characters."""
    a = params.a_w
    return params.memo(
        ("Lambda", l),
        lambda: GradedOperator.diagonal(params.n, lambda p: elementary([a[i] for i in p.members], l), params.ar),
    )


def _powers(op: GradedOperator, top: int) -> list[GradedOperator]:
    out = [GradedOperator.identity(op.n, op.ar)]
    for _ in range(top):
        out.append(op @ out[-1])
    return out


def _coefficient_operator(fn, m: int, params: ModelParams) -> GradedOperator:
    """Sector scalar fn(k), skipped where the m-th term vanishes (k < m)."""
    return GradedOperator.sector_scalar(params.n, lambda k: fn(k) if k >= m else 0, params.ar)


def quantum_exterior(l: int, z: Any, params: ModelParams,
                     convention: UniversalConvention = RESOLVED) -> QuantumClassOperator:
    n = params.n
    if l < 0:
        raise ValueError("l must be non-negative")
    if l > n:
        return QuantumClassOperator(f"Lambda^{l}", l, z, GradedOperator.zero(n, 0, params.ar))
    Fp = _powers(op_F(0, params), l)
    Ep = _powers(op_E(-1, params), l)
    total = GradedOperator.zero(n, 0, params.ar)
    for m in range(l + 1):
        coef = _coefficient_operator(lambda k: coeff_a(m, z, params, k, convention), m, params)
        total = total + coef @ Fp[m] @ classical_exterior(l - m, params) @ Ep[m]
    return QuantumClassOperator(f"Lambda^{l}", l, z, total)


def quantum_line_bundle(z: Any, params: ModelParams,
                        convention: UniversalConvention = RESOLVED) -> QuantumClassOperator:
    """B(z) O(1) with B(z) = sum_m a_m(z) F_0^m E_0^m."""
    n = params.n
    Fp = _powers(op_F(0, params), n)
    Ep = _powers(op_E(0, params), n)
    B = GradedOperator.zero(n, 0, params.ar)
    for m in range(n + 1):
        coef = _coefficient_operator(lambda k: coeff_a(m, z, params, k, convention), m, params)
        B = B + coef @ Fp[m] @ Ep[m]
    O1 = GradedOperator.diagonal(n, lambda p: elementary([params.a_w[i] for i in p.members], len(p.members)),
                                 params.ar)
    return QuantumClassOperator("O(1)", None, z, B @ O1)


# ---------------------------------------------------------------------------
# Q-operators


@dataclass(frozen=True)
class QOperatorSeries:
    side: str
    z: Any
    series: OperatorSeries
    normalization: str = "raw"
    provenance: str = "combinatorial_formula"

    @property
    def order(self) -> int:
        return self.series.order

    def __call__(self, x: Any) -> GradedOperator:
        return self.series(x)

    def normalized(self, params: ModelParams) -> "QOperatorSeries":
        if self.normalization != "raw":
            raise ValueError("series is already normalized")
        F = normalization_F(params, self.order)
        return replace(self, series=self.series.times_scalar_series(F), normalization="F_normalized")


def _signed_exterior(j: int, params: ModelParams) -> GradedOperator:
    """W_j: diagonal (-1)^j e_j(a_p), zero beyond the chain length."""
    if j > params.n:
        return GradedOperator.zero(params.n, 0, params.ar)
    return classical_exterior(j, params).scale((-1) ** j)


def q_plus_series(z: Any, M: int, params: ModelParams,
                  convention: UniversalConvention = RESOLVED) -> QOperatorSeries:
    """Q_+(x) = sum_m W^Z_m x^m through x^M for a chain at params.hbar, z = Z^2."""
    n = params.n
    geo = params.with_inverse_hbar()
    top = min(M, n)
    Fp = _powers(op_F(0, geo), top)
    Ep = _powers(op_E(-1, geo), top)
    coefs = [_coefficient_operator(lambda k: coeff_c(j, z, params, k, convention), j, params)
             for j in range(top + 1)]
    out = []
    for m in range(M + 1):
        acc = GradedOperator.zero(n, 0, params.ar)
        for j in range(min(m, top) + 1):
            if m - j > n:
                continue
            acc = acc + coefs[j] @ Fp[j] @ _signed_exterior(m - j, params) @ Ep[j]
        out.append(acc)
    return QOperatorSeries("plus", params.ar.c(z), OperatorSeries(out, "x"))


def normalization_F(params: ModelParams, M: int) -> PowerSeries:
    """F(x) = prod_i (a_i x; hbar^2)_inf / (a_i hbar x; hbar^2)_inf through x^M.

    Each factor f_i satisfies f_i(x/hbar^2)(1 - a_i x/hbar) = (1 - a_i x/hbar^2) f_i(x).
    """
    ar = params.ar
    h = params.hbar_w
    b = h * h
    out = PowerSeries.constant(1, M, "x", ar)
    for a in params.a_w:
        out = out * q_pochhammer_series(a, b, M, ar) * q_pochhammer_inverse_series(a * h, b, M, ar)
    return out


def _poly_coeffs(roots: Sequence[Any], M: int, ar) -> list[Any]:
    """Coefficients of prod (1 - x s) through x^M."""
    c = [ar.c(1)] + [ar.c(0)] * M
    for s in roots:
        for m in range(M, 0, -1):
            c[m] = c[m] - s * c[m - 1]
    return c


def _solution_sets(params: ModelParams, z: Any, convention: str, sizes: Sequence[int],
                   control: StepControl | None) -> dict[int, SolutionSet]:
    return {k: solve_all(BetheSystem(params.n, k, params, convention, z), control) for k in sizes}


def _match(plus_vals: Sequence[Any], minus_vals: Sequence[Any], what: str) -> list[int]:
    """Bijection i -> j pairing equal values; IncompleteSet if ambiguous."""
    used: set[int] = set()
    out = []
    for x in plus_vals:
        d = [float(abs(x - y)) / max(1.0, float(abs(x))) for y in minus_vals]
        j = int(np.argmin(d))
        if d[j] > 1e-6 or j in used:
            raise IncompleteSet(f"{what}: no unique partner (distance {d[j]:.3g})")
        used.add(j)
        out.append(j)
    return out


MATCH_U = 0.83 + 0.29j
LAGRANGE_POINTS = (0.61 - 0.37j, 0.93 + 0.52j, -0.47 + 0.71j, 1.37 - 0.11j)


def sqrt_twist(z: Any, params: ModelParams) -> Any:
    """Principal Z = z^{1/2}."""
    return params.ar.sqrt(params.ar.c(z))


def minus_partners(z: Any, params: ModelParams, plus: dict[int, SolutionSet] | None = None,
                   minus: dict[int, SolutionSet] | None = None,
                   control: StepControl | None = None) -> dict[int, list[tuple[Any, Any]]]:
    """Per sector k, pairs (plus roots, minus roots) sharing one transfer eigenvalue.

    Plus roots solve the B-chain equations (k roots), minus roots the C-chain
    equations (n - k roots); both live in sector k of the chain.
    """
    n = params.n
    plus = plus if plus is not None else _solution_sets(params, z, "aba", range(n + 1), control)
    minus = minus if minus is not None else _solution_sets(params, z, "aba_minus", range(n + 1), control)
    Z = sqrt_twist(z, params)
    out = {}
    for k in range(n + 1):
        ps, ms = plus[k].solutions, minus[n - k].solutions
        if len(ps) != comb(n, k) or len(ms) != comb(n, k):
            raise IncompleteSet(f"sector {k}: need {comb(n, k)} solutions on both sides")
        lp = [transfer_eigenvalue(MATCH_U, s.roots, Z, params) for s in ps]
        lm = [transfer_eigenvalue(MATCH_U, s.roots, 1 / Z, params) for s in ms]
        idx = _match(lp, lm, f"sector {k}")
        out[k] = [(ps[i].roots, ms[j].roots) for i, j in enumerate(idx)]
    return out


def _lagrange_projectors(A: np.ndarray, mus: Sequence[Any], ar) -> list[np.ndarray]:
    N = len(mus)
    eye = ar.eye(N)
    out = []
    for j in range(N):
        P = ar.eye(N)
        for i in range(N):
            if i != j:
                P = P @ (A - eye * mus[i]) / (mus[j] - mus[i])
        out.append(P)
    return out


def q_minus_series(z: Any, M: int, params: ModelParams, pairs: dict[int, list[tuple[Any, Any]]] | None = None,
                   control: StepControl | None = None) -> QOperatorSeries:
    """Q_- on the fixed-point space by spectral synthesis.

    The eigenprojectors are Lagrange polynomials in Q_+(x0); on the
    projector of a plus solution, Q_- acts by prod (1 - x t_i) over the
    partner minus roots.
    """
    n, ar = params.n, params.ar
    pairs = pairs if pairs is not None else minus_partners(z, params, control=control)
    Qp = q_plus_series(z, n, params)
    blocks: list[dict[int, np.ndarray]] = [dict() for _ in range(M + 1)]
    for k in range(n + 1):
        plist = pairs[k]
        # the evaluation point that best separates the plus eigenvalues
        best = None
        for x0 in LAGRANGE_POINTS:
            mus = [_poly_coeffs(s, n, ar) for s, _ in plist]
            vals = [sum((c * ar.c(x0) ** m for m, c in enumerate(cs)), ar.c(0)) for cs in mus]
            gap = min((float(abs(vals[i] - vals[j])) for i in range(len(vals)) for j in range(i)), default=1.0)
            if best is None or gap > best[0]:
                best = (gap, x0, vals)
        _, x0, mus = best
        A = Qp(ar.c(x0)).block(k)
        projs = _lagrange_projectors(A, mus, ar)
        for (_, t), P in zip(plist, projs):
            cs = _poly_coeffs(t, M, ar)
            for m in range(M + 1):
                blocks[m][k] = blocks[m].get(k, ar.zeros(P.shape)) + P * cs[m]
    ops = [GradedOperator(n, 0, b, ar) for b in blocks]
    return QOperatorSeries("minus", ar.c(z), OperatorSeries(ops, "x"), provenance="spectral_synthesis")


def _half_K(params: ModelParams, inverse_power: bool = False) -> GradedOperator:
    q4 = params.hbar_quarter_w
    e = -1 if inverse_power else 1
    return GradedOperator.sector_scalar(params.n, lambda k: q4 ** (e * (params.n - 2 * k)), params.ar)


def _scalar_series_operator(coeffs: Sequence[Any], params: ModelParams, left: GradedOperator) -> list[GradedOperator]:
    return [left.scale(c) for c in coeffs]


def check_wronskian(z: Any, M: int, params: ModelParams, pairs: dict[int, list[tuple[Any, Any]]] | None = None,
                    tol: float = 1e-8, sabotage_branch: bool = False,
                    control: StepControl | None = None) -> VerificationReport:
    """Z K^{1/2} Q+(t x) Q-(x/t) - Z^{-1} K^{-1/2} Q+(x/t) Q-(t x) = (Z K^{1/2} - K^{-1/2}/Z) prod(1 - a_i x/t).

    t = hbar^{1/2}.  With ``sabotage_branch`` the left side uses -Z.
    """
    start = time.perf_counter()
    ar = params.ar
    t = params.sqrt_hbar_w
    Z = sqrt_twist(z, params)
    Zl = -Z if sabotage_branch else Z
    pairs = pairs if pairs is not None else minus_partners(z, params, control=control)
    Qp = q_plus_series(z, M, params).series
    Qm = q_minus_series(z, M, params, pairs).series
    Kh, Khi = _half_K(params), _half_K(params, inverse_power=True)
    lhs = (Qp.rescale(t) @ Qm.rescale(1 / t)).left(Kh).scale(Zl) - \
        (Qp.rescale(1 / t) @ Qm.rescale(t)).left(Khi).scale(1 / Zl)
    G = _poly_coeffs([a / t for a in params.a_w], M, ar)
    pref = Kh.scale(Z) - Khi.scale(1 / Z)
    rep = VerificationReport("wronskian")
    for m in range(M + 1):
        rep.add(f"wronskian: x^{m}", "quantum Wronskian relation between Q+ and Q-",
                (lhs[m] - pref.scale(G[m])).absmax(), tol)
    rep.metadata.update({"n": params.n, "z": ar.format(ar.c(z)), "M": M, "params_hash": params.digest(),
                         "sabotage_branch": sabotage_branch})
    rep.wall_time = time.perf_counter() - start
    return rep


# ---------------------------------------------------------------------------
# TQ relation on the chain


def transfer_polynomial(params: ModelParams, Z: Any) -> list[GradedOperator]:
    """Coefficients of t(x) = tr T(u) prod xi_i / u^n, a polynomial of degree n in x = u^{-2}.

    Recovered exactly by a discrete Fourier transform over n + 1 points of the unit circle.
    """
    n, ar = params.n, params.ar
    N = n + 1
    xi_prod = ar.c(1)
    for xi in params.xi_w:
        xi_prod = xi_prod * xi
    two_pi_i = 2 * ar.c(np.pi) * 1j if not ar.is_mp else 2 * ar.ctx.pi * ar.ctx.j
    samples = []
    for j in range(N):
        x = ar.exp(two_pi_i * j / N)
        u = 1 / ar.sqrt(x)
        samples.append(build_monodromy(u, Z, params).trace.scale(xi_prod / u ** n))
    coeffs = []
    for m in range(N):
        acc = GradedOperator.zero(n, 0, ar)
        for j in range(N):
            acc = acc + samples[j].scale(ar.exp(-two_pi_i * j * m / N))
        coeffs.append(acc.scale(ar.c(1) / N))
    return coeffs


def _eigen_series(vectors: list[np.ndarray], roots: list[Sequence[Any]], M: int, ar) -> list[np.ndarray]:
    """Coefficient blocks of V diag(prod(1 - x s)) V^{-1}."""
    V = np.array(vectors, dtype=object if ar.is_mp else np.complex128).T
    Vi = inverse(V, ar)
    cs = [_poly_coeffs(r, M, ar) for r in roots]
    out = []
    for m in range(M + 1):
        D = ar.zeros((len(roots), len(roots)))
        for i, c in enumerate(cs):
            D[i, i] = c[m]
        out.append(V @ D @ Vi)
    return out


def chain_q_series(z: Any, M: int, params: ModelParams, pairs: dict[int, list[tuple[Any, Any]]]
                   ) -> tuple[OperatorSeries, OperatorSeries]:
    """Q_+ from B-chain vectors and Q_- from C-chain vectors, on the chain basis."""
    n, ar = params.n, params.ar
    Z = sqrt_twist(z, params)
    plus_blocks: list[dict[int, np.ndarray]] = [dict() for _ in range(M + 1)]
    minus_blocks: list[dict[int, np.ndarray]] = [dict() for _ in range(M + 1)]
    for k in range(n + 1):
        ps = [p for p, _ in pairs[k]]
        ms = [m for _, m in pairs[k]]
        vp = [bethe_vector(s, Z, params, "plus").vector for s in ps]
        vm = [bethe_vector(s, Z, params, "minus").vector for s in ms]
        for m, blk in enumerate(_eigen_series(vp, ps, M, ar)):
            plus_blocks[m][k] = blk
        for m, blk in enumerate(_eigen_series(vm, ms, M, ar)):
            minus_blocks[m][k] = blk
    return (OperatorSeries([GradedOperator(n, 0, b, ar) for b in plus_blocks], "x"),
            OperatorSeries([GradedOperator(n, 0, b, ar) for b in minus_blocks], "x"))


def _series_from_ops(ops: Sequence[GradedOperator], M: int, params: ModelParams) -> OperatorSeries:
    ops = list(ops)[: M + 1]
    while len(ops) < M + 1:
        ops.append(GradedOperator.zero(params.n, 0, params.ar))
    return OperatorSeries(ops, "x")


def _tq_sides(tpoly: OperatorSeries, Q: OperatorSeries, params: ModelParams, Z: Any, side: str):
    """(t(x) Q(x), hbar^{n/4}[c G(x/h) Q(h x) + c^{-1} G(x) Q(x/h)]) as operator series."""
    n, ar, h = params.n, params.ar, params.hbar_w
    M = Q.order
    Kh, Khi = _half_K(params), _half_K(params, inverse_power=True)
    lead, rest = (Kh.scale(Z), Khi.scale(1 / Z)) if side == "plus" else (Khi.scale(1 / Z), Kh.scale(Z))
    G = PowerSeries.of(_poly_coeffs(list(params.a_w), M, ar), "x")
    hq = params.hbar_quarter_w ** n
    lhs = tpoly @ Q
    first = Q.rescale(h).times_scalar_series(G.rescale(1 / h)).left(lead)
    second = Q.rescale(1 / h).times_scalar_series(G).left(rest)
    return lhs, (first + second).scale(hq)


def check_tq(z: Any, u_grid: Sequence[Any], M: int, params: ModelParams,
             pairs: dict[int, list[tuple[Any, Any]]] | None = None, tol: float = 1e-8,
             control: StepControl | None = None) -> VerificationReport:
    """TQ relations for the chain-space Q_+ and Q_-.

    Coefficient-wise through x^M using the exact transfer polynomial, then
    pointwise at every u of ``u_grid`` with tr T(u) built directly.
    """
    start = time.perf_counter()
    n, ar = params.n, params.ar
    Z = sqrt_twist(z, params)
    pairs = pairs if pairs is not None else minus_partners(z, params, control=control)
    Qp, Qm = chain_q_series(z, M, params, pairs)
    tpoly = transfer_polynomial(params, Z)
    tser = _series_from_ops(tpoly, M, params)
    rep = VerificationReport("tq")
    for side, Q in (("plus", Qp), ("minus", Qm)):
        lhs, rhs = _tq_sides(tser, Q, params, Z, side)
        for m in range(M + 1):
            scale = max(1.0, lhs[m].absmax())
            rep.add(f"tq {side}: x^{m}", f"TQ relation for Q{'+' if side == 'plus' else '-'}",
                    (lhs[m] - rhs[m]).absmax() / scale, tol)
    # pointwise, with exact polynomials and the directly assembled transfer matrix
    full = n
    Qp_full, Qm_full = chain_q_series(z, full, params, pairs)
    xi_prod = ar.c(1)
    for xi in params.xi_w:
        xi_prod = xi_prod * xi
    for u in u_grid:
        u = ar.c(u)
        x = 1 / (u * u)
        tu = build_monodromy(u, Z, params).trace.scale(xi_prod / u ** n)
        for side, Q in (("plus", Qp_full), ("minus", Qm_full)):
            Kh, Khi = _half_K(params), _half_K(params, inverse_power=True)
            lead, rest = (Kh.scale(Z), Khi.scale(1 / Z)) if side == "plus" else (Khi.scale(1 / Z), Kh.scale(Z))
            h = params.hbar_w
            G = lambda y: _poly_value(params.a_w, y)
            lhs = tu @ Q(x)
            rhs = (lead @ Q(h * x)).scale(G(x / h)) + (rest @ Q(x / h)).scale(G(x))
            rhs = rhs.scale(params.hbar_quarter_w ** n)
            scale = max(1.0, lhs.absmax())
            rep.add(f"tq {side}: u={complex(u):.4g}", "TQ relation at a spectral point",
                    (lhs - rhs).absmax() / scale, tol)
    rep.metadata.update({"n": n, "z": ar.format(ar.c(z)), "M": M, "params_hash": params.digest()})
    rep.wall_time = time.perf_counter() - start
    return rep


def _poly_value(a: Sequence[Any], x: Any) -> Any:
    out = 1 + 0 * x
    for ai in a:
        out = out * (1 - ai * x)
    return out


# ---------------------------------------------------------------------------
# identity suites


def identify_q_with_exterior(z: Any, M: int, params: ModelParams, convention: UniversalConvention = RESOLVED,
                             tol: float = 1e-9) -> VerificationReport:
    """Q_+ of the chain at 1/hbar with Z^2 = (-1)^n z against sum_l (-1)^l Lambda-hat^l(z) x^l."""
    start = time.perf_counter()
    n, ar = params.n, params.ar
    chain = params.with_inverse_hbar()
    Qp = q_plus_series((-1) ** n * ar.c(z), M, chain, convention).series
    rep = VerificationReport("qop")
    for m in range(M + 1):
        target = quantum_exterior(m, z, params, convention).operator.scale((-1) ** m)
        rep.add(f"identify: x^{m}", "Q+ equals the alternating quantum exterior series",
                (Qp[m] - target).absmax(), tol)
    rep.metadata.update({"n": n, "z": ar.format(ar.c(z)), "M": M, "params_hash": params.digest()})
    rep.wall_time = time.perf_counter() - start
    return rep


def check_line_bundle(z: Any, params: ModelParams, convention: UniversalConvention = RESOLVED,
                      tol: float = 1e-10) -> VerificationReport:
    """Lambda-hat^k(z) and the quantum line bundle agree on sector k."""
    rep = VerificationReport("qop")
    L = quantum_line_bundle(z, params, convention).operator
    worst = 0.0
    for k in range(params.n + 1):
        E = quantum_exterior(k, z, params, convention).operator
        worst = max(worst, float(np.max(np.abs(np.asarray(E.block(k) - L.block(k), dtype=np.complex128)))))
    rep.add("line bundle: top exterior power", "quantum line bundle equals the top quantum exterior power",
            worst, tol)
    return rep


def check_exterior_eigen(z: Any, params: ModelParams, solutions: dict[int, SolutionSet] | None = None,
                         convention: UniversalConvention = RESOLVED, tol: float = 1e-8,
                         classical_z: float = 1e-6, classical_tol: float = 1e-4,
                         control: StepControl | None = None) -> VerificationReport:
    """Eigenvalue theorem, commuting family and classical limit for Lambda-hat^l(z).

    For each Bethe solution the eigenvector is the null vector of
    sum_l (-x0)^l Lambda-hat^l - prod(1 - x0 s); every Lambda-hat^l must act on it by e_l(s).
    """
    start = time.perf_counter()
    n, ar = params.n, params.ar
    solutions = solutions if solutions is not None else _solution_sets(params, z, "geometric", range(n + 1), control)
    ops = [quantum_exterior(l, z, params, convention).operator for l in range(n + 1)]
    rep = VerificationReport("qop")
    x0 = 0.57 - 0.31j
    worst = 0.0
    for k in range(1, n + 1):
        blocks = [np.asarray(op.block(k), dtype=np.complex128) for op in ops[: k + 1]]
        gen = sum(b * (-x0) ** l for l, b in enumerate(blocks))
        for sol in solutions[k].solutions:
            s = [complex(v) for v in sol.roots]
            mu = _poly_value(s, x0)
            vec, _ = null_vector(gen - mu * np.eye(gen.shape[0]))
            for l in range(1, k + 1):
                target = elementary(s, l)
                r = norm2(blocks[l] @ vec - target * vec) / (norm2(vec) * max(1.0, abs(target)))
                worst = max(worst, r)
    rep.add("eigen: Lambda-hat^l on Bethe eigenvectors", "quantum exterior eigenvalues are e_l of Bethe roots",
            worst, tol)
    comm = 0.0
    for l in range(1, n + 1):
        for m in range(l + 1, n + 1):
            c = ops[l].commutator(ops[m]).absmax() / max(ops[l].absmax(), ops[m].absmax())
            comm = max(comm, c)
    rep.add("commuting: [Lambda-hat^l, Lambda-hat^m]", "quantum exterior powers commute", comm, tol)
    lim = 0.0
    for l in range(1, n + 1):
        diff = quantum_exterior(l, classical_z, params, convention).operator - classical_exterior(l, params)
        lim = max(lim, diff.absmax())
    rep.add(f"classical: z={classical_z:g}", "quantum exterior powers reduce to e_l at fixed points",
            lim, classical_tol)
    rep.metadata.update({"n": n, "z": ar.format(ar.c(z)), "params_hash": params.digest(),
                         "perturbation": convention.perturbation})
    rep.wall_time = time.perf_counter() - start
    return rep


def check_qop(z: Any, params: ModelParams, M: int = 4, solutions: dict[int, SolutionSet] | None = None,
              convention: UniversalConvention = RESOLVED, tol_eigen: float = 1e-8, tol_identity: float = 1e-9,
              tol_line: float = 1e-10, control: StepControl | None = None) -> VerificationReport:
    """Line bundle, Q_+ identification and eigenvalue checks in one report."""
    start = time.perf_counter()
    rep = VerificationReport("qop")
    rep.extend(check_line_bundle(z, params, convention, tol_line))
    rep.extend(identify_q_with_exterior(z, M, params, convention, tol_identity))
    rep.extend(check_exterior_eigen(z, params, solutions, convention, tol_eigen, control=control))
    rep.wall_time = time.perf_counter() - start
    return rep


__all__ = [
    "FACTORIALS", "EXPONENTS", "RESOLVED", "RESONANCE_TOL", "QOperatorSeries", "QuantumClassOperator",
    "UniversalConvention", "check_exterior_eigen", "check_line_bundle", "check_qop", "check_tq",
    "check_wronskian", "chain_q_series", "classical_exterior", "coeff_a", "coeff_c", "identify_q_with_exterior",
    "minus_partners", "normalization_F", "q_minus_series", "q_plus_series", "quantum_exterior",
    "quantum_line_bundle", "sqrt_twist", "transfer_polynomial",
]
