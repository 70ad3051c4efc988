"""Geometric action of the quantum loop algebra on the fixed-point space.

Drinfeld generators act on the basis O_p (p a k-subset of {1..n}):
K and H_m are diagonal, E_r removes one element of p, F_r adds one.
All square roots of hbar come from ``params.sqrt_hbar_w``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any

from .core.params import ModelParams
from .core.space import FixedPoint, GradedOperator, enumerate_fixed_points, sector_index
from .errors import NearSingularDenominator, ZeroMode
from .report import VerificationReport


def quantum_integer(m: int, t: Any) -> Any:
    """Symmetric quantum integer [m]_t = (t^m - t^-m)/(t - 1/t)."""
    return (t ** m - t ** (-m)) / (t - 1 / t)


def op_K(params: ModelParams) -> GradedOperator:
    return params.memo(("K",), lambda: GradedOperator.sector_scalar(params.n, params.sector_K, params.ar))


def op_K_inv(params: ModelParams) -> GradedOperator:
    return params.memo(
        ("K_inv",), lambda: GradedOperator.sector_scalar(params.n, lambda k: 1 / params.sector_K(k), params.ar)
    )


def h_eigenvalue(m: int, p: FixedPoint, params: ModelParams) -> Any:
    t = params.sqrt_hbar_w
    a = params.a_w
    outside = sum((a[i] ** (-m) for i in p.complement), params.ar.c(0))
    inside = sum((a[i] ** (-m) for i in p.members), params.ar.c(0))
    return quantum_integer(m, t) / m * (t ** (-m) * outside - t ** m * inside)


def op_H(m: int, params: ModelParams) -> GradedOperator:
    if m == 0:
        raise ZeroMode("H_0 is not a Drinfeld generator")
    return params.memo(
        ("H", m), lambda: GradedOperator.diagonal(params.n, lambda p: h_eigenvalue(m, p, params), params.ar)
    )


def _denominator_guard(params: ModelParams, x: Any, y: Any) -> None:
    scale = max(abs(v) for v in params.a_w)
    if abs(x - y) < params.genericity_tol * scale:
        raise NearSingularDenominator(f"|a_j - a_s| = {float(abs(x - y)):.3g} below tolerance")


def _build_E(r: int, params: ModelParams) -> GradedOperator:
    n, ar, a, h = params.n, params.ar, params.a_w, params.hbar_w
    blocks = {}
    for k in range(1, n + 1):
        rows = sector_index(n, k - 1)
        pts = enumerate_fixed_points(n, k)
        blk = ar.zeros((len(rows), len(pts)))
        for col, q in enumerate(pts):
            for s in q.members:
                num = ar.c(1)
                for j in q.members:
                    if j != s:
                        num = num * (a[j] - h * a[s])
                den = ar.c(1)
                for j in q.complement:
                    _denominator_guard(params, a[j], a[s])
                    den = den * (a[j] - a[s])
                blk[rows[q.mask & ~(1 << s)], col] += a[s] ** (-r - 1) * num / den
        blocks[k] = blk
    return GradedOperator(n, -1, blocks, ar)


def _build_F(r: int, params: ModelParams) -> GradedOperator:
    n, ar, a, h, t = params.n, params.ar, params.a_w, params.hbar_w, params.sqrt_hbar_w
    blocks = {}
    for k in range(0, n):
        rows = sector_index(n, k + 1)
        pts = enumerate_fixed_points(n, k)
        blk = ar.zeros((len(rows), len(pts)))
        pref = t ** (n - 2 * k - 1)
        for col, p in enumerate(pts):
            for s in p.complement:
                num = ar.c(1)
                for j in p.complement:
                    if j != s:
                        num = num * (a[j] - a[s] / h)
                den = ar.c(1)
                for j in p.members:
                    _denominator_guard(params, a[j], a[s])
                    den = den * (a[j] - a[s])
                blk[rows[p.mask | (1 << s)], col] += pref * a[s] ** (-r + 1) * num / den
        blocks[k] = blk
    return GradedOperator(n, 1, blocks, ar)


def op_E(r: int, params: ModelParams) -> GradedOperator:
    return params.memo(("E", r), lambda: _build_E(r, params))


def op_F(r: int, params: ModelParams) -> GradedOperator:
    return params.memo(("F", r), lambda: _build_F(r, params))


def _exp_series(log_coeffs: list[Any], order: int, one: Any) -> list[Any]:
    """Coefficients of exp(sum_{k>=1} L_k w^k) via the recursion m E_m = sum k L_k E_{m-k}."""
    out = [one]
    for m in range(1, order + 1):
        acc = 0 * one
        for k in range(1, m + 1):
            acc = acc + k * log_coeffs[k] * out[m - k]
        out.append(acc / m)
    return out


def psi_series(params: ModelParams, M: int, sign_K: int = 1) -> tuple[list[GradedOperator], list[GradedOperator]]:
    """(psi^+_0..psi^+_M, psi^-_0..psi^-_{-M}) as diagonal operators.

    sum psi^+_m w^{-m} = K exp((t - 1/t) sum_{k>0} H_k w^{-k}),
    sum psi^-_{-m} w^{m} = K^{-1} exp(-(t - 1/t) sum_{k>0} H_{-k} w^{k}),
    with t = hbar^{1/2}.  ``sign_K = -1`` is a deliberate sabotage switch.
    """
    n, ar, t = params.n, params.ar, params.sqrt_hbar_w
    c = t - 1 / t
    plus_vals: dict[int, list[Any]] = {}
    minus_vals: dict[int, list[Any]] = {}
    for k in range(n + 1):
        for p in enumerate_fixed_points(n, k):
            Kp = sign_K * params.sector_K(k)
            lp = [None] + [c * h_eigenvalue(j, p, params) for j in range(1, M + 1)]
            lm = [None] + [-c * h_eigenvalue(-j, p, params) for j in range(1, M + 1)]
            plus_vals[p.mask] = [Kp * v for v in _exp_series(lp, M, ar.c(1))]
            minus_vals[p.mask] = [v / Kp for v in _exp_series(lm, M, ar.c(1))]
    plus = [GradedOperator.diagonal(n, lambda p, m=m: plus_vals[p.mask][m], ar) for m in range(M + 1)]
    minus = [GradedOperator.diagonal(n, lambda p, m=m: minus_vals[p.mask][m], ar) for m in range(M + 1)]
    return plus, minus


@dataclass(frozen=True)
class DrinfeldGenerators:
    """Lazy accessor bundling the generators for one parameter set."""

    params: ModelParams

    @property
    def K(self) -> GradedOperator:
        return op_K(self.params)

    @property
    def K_inv(self) -> GradedOperator:
        return op_K_inv(self.params)

    def H(self, m: int) -> GradedOperator:
        return op_H(m, self.params)

    def E(self, r: int) -> GradedOperator:
        return op_E(r, self.params)

    def F(self, r: int) -> GradedOperator:
        return op_F(r, self.params)

    def psi(self, M: int) -> tuple[list[GradedOperator], list[GradedOperator]]:
        return psi_series(self.params, M)


def check_drinfeld(params: ModelParams, index_range: int = 2, tol: float = 1e-10,
                   sabotage_sign: bool = False) -> VerificationReport:
    """Residuals of the Drinfeld relations for generator indices |r| <= index_range.

    Each relation family reports its worst max-entry residual.  With
    ``sabotage_sign`` the Cartan element K is replaced by -K throughout.
    """
    start = time.perf_counter()
    R = int(index_range)
    sign = -1 if sabotage_sign else 1
    h = params.hbar_w
    t = params.sqrt_hbar_w
    K = op_K(params).scale(sign)
    Kinv = op_K_inv(params).scale(sign)
    idx = range(-R, R + 1)
    nz = [m for m in idx if m != 0]
    M = 2 * R
    plus, minus = psi_series(params, M, sign_K=sign)
    zero0 = GradedOperator.zero(params.n, 0, params.ar)

    def psi_plus(j: int) -> GradedOperator:
        return plus[j] if j >= 0 else zero0

    def psi_minus(j: int) -> GradedOperator:
        return minus[-j] if j <= 0 else zero0

    worst: dict[str, tuple[float, str]] = {}

    def record(name: str, value: float, where: str) -> None:
        if name not in worst or value > worst[name][0]:
            worst[name] = (value, where)

    for r in idx:
        E, F = op_E(r, params), op_F(r, params)
        record("K E K^-1 = hbar E", (K @ E @ Kinv - E.scale(h)).absmax(), f"r={r}")
        record("K F K^-1 = hbar^-1 F", (K @ F @ Kinv - F.scale(1 / h)).absmax(), f"r={r}")
        record("K K^-1 = 1", (K @ Kinv - GradedOperator.identity(params.n, params.ar)).absmax(), "")
    for m in nz:
        for l in nz:
            record("[H_m, H_l] = 0", op_H(m, params).commutator(op_H(l, params)).absmax(), f"m={m},l={l}")
    for m in idx:
        for l in idx:
            j = m + l
            lhs = op_E(m, params).commutator(op_F(l, params))
            rhs = (psi_plus(j) - psi_minus(j)).scale(1 / (t - 1 / t))
            record("[E_m, F_l] = (psi+ - psi-)/(t - 1/t)", (lhs - rhs).absmax(), f"m={m},l={l}")
    for k in nz:
        c = quantum_integer(2 * k, t) / k
        Hk = op_H(k, params)
        for l in idx:
            record("[H_k, E_l] = [2k]/k E_{k+l}",
                   (Hk.commutator(op_E(l, params)) - op_E(k + l, params).scale(c)).absmax(), f"k={k},l={l}")
            record("[H_k, F_l] = -[2k]/k F_{k+l}",
                   (Hk.commutator(op_F(l, params)) + op_F(k + l, params).scale(c)).absmax(), f"k={k},l={l}")
    for r in idx:
        E, F = op_E(r, params), op_F(r, params)
        record("grading: E lowers, F raises", 0.0 if (E.shift, F.shift) == (-1, 1) else 1.0, f"r={r}")

    rep = VerificationReport("algebra")
    for name, (value, where) in worst.items():
        rep.add(f"drinfeld: {name}", f"quantum loop algebra relation (worst at {where or '-'})", value, tol)
    rep.metadata.update({
        "n": params.n,
        "params_hash": params.digest(),
        "precision_bits": params.precision_bits,
        "index_range": R,
        "sabotage_sign": sabotage_sign,
    })
    rep.wall_time = time.perf_counter() - start
    return rep
