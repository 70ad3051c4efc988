"""Bethe equations: residuals, conventions, homotopy continuation, caching.

Every convention is solved through one canonical equation

    prod_j (s_i - a_j)/(h a_j - s_i) = w r^{-n} prod_{j != i} (s_i h - s_j)/(s_i - s_j h)

with data (a, h, r = h^{1/2}, w).  The conventions differ only in how
(a, h, r, w) are obtained from the user-facing (a, hbar, z):

    geometric   (a,       hbar,   hbar^{1/2},   z)
    saddle      (a,       hbar,   hbar^{1/2},   z)
    aba         (a,       1/hbar, hbar^{-1/2},  (-1)^n z)     z = Z^2
    aba_minus   (a/hbar,  hbar,   hbar^{1/2},   (-1)^n z)     z = Z^2

"aba" is the algebraic Bethe ansatz equation for B-chain vectors with twist
Z, "aba_minus" the one for C-chain vectors.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Any, Iterable, Sequence

import numpy as np

from .core.params import ModelParams
from .core.scalars import Arith, arith
from .core.symfun import SymmetricFunctionSpec
from .errors import IncompleteSet, PathCollision, PoleHit, StepUnderflow

CONVENTIONS = ("geometric", "saddle", "aba", "aba_minus")

# Resolved sign table: (factor multiplying a, invert hbar, sign of w / z as (-1)^n power)
CONVENTION_TABLE: dict[str, dict[str, Any]] = {
    "geometric": {"a_scale": "1", "hbar": "hbar", "w": "z"},
    "saddle": {"a_scale": "1", "hbar": "hbar", "w": "z"},
    "aba": {"a_scale": "1", "hbar": "1/hbar", "w": "(-1)^n z"},
    "aba_minus": {"a_scale": "1/hbar", "hbar": "hbar", "w": "(-1)^n z"},
}

CACHE_ENV = "XXZQK_CACHE_DIR"
EPS_DOUBLE = float(np.finfo(float).eps)


@dataclass(frozen=True)
class CanonicalForm:
    a: tuple[Any, ...]
    h: Any
    r: Any
    w: Any
    ar: Arith

    @property
    def n(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class BetheSystem:
    n: int
    k: int
    params: ModelParams
    convention: str = "geometric"
    z: Any = 0.0

    def __post_init__(self) -> None:
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")
        if self.n != self.params.n:
            raise ValueError("system and params disagree on n")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"need 0 <= k <= n, got k={self.k}")

    def canonical(self, ar: Arith | None = None) -> CanonicalForm:
        p = self.params
        ar = ar or p.ar
        a = tuple(ar.c(x) for x in p.a_w)
        h, r = ar.c(p.hbar_w), ar.c(p.sqrt_hbar_w)
        z = ar.c(self.z)
        sign = (-1) ** self.n
        if self.convention in ("geometric", "saddle"):
            return CanonicalForm(a, h, r, z, ar)
        if self.convention == "aba":
            return CanonicalForm(a, 1 / h, 1 / r, sign * z, ar)
        return CanonicalForm(tuple(x / h for x in a), h, r, sign * z, ar)

    def with_z(self, z: Any) -> "BetheSystem":
        return BetheSystem(self.n, self.k, self.params, self.convention, z)


@dataclass(frozen=True)
class Residual:
    cleared: tuple[Any, ...]
    log: tuple[Any, ...]

    def max_cleared(self) -> float:
        return max((float(abs(v)) for v in self.cleared), default=0.0)

    def max_log(self) -> float:
        return max((float(abs(v)) for v in self.log), default=0.0)


@dataclass(frozen=True)
class StepControl:
    initial_step: float = 0.05
    min_step: float = 1e-7
    max_step: float = 0.25
    newton_iters: int = 8
    path_tol: float = 1e-9
    final_tol: float = 1e-13
    collision_tol: float = 1e-5
    detour: complex = 0.0
    max_steps: int = 20000
    escalate_bits: int = 256
    max_relative_move: float = 0.1


@dataclass(frozen=True)
class BetheSolution:
    roots: tuple[Any, ...]
    z: Any
    residual_norm: float
    origin: int
    path_steps: int
    convention: str
    precision_bits: int = 53

    @property
    def k(self) -> int:
        return len(self.roots)


@dataclass(frozen=True)
class SolutionSet:
    n: int
    k: int
    z: Any
    convention: str
    params_hash: str
    solutions: tuple[BetheSolution, ...]
    complete: bool
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)


# ---------------------------------------------------------------------------
# residuals in each printed form


def _prod(values: Iterable[Any], one: Any) -> Any:
    out = one
    for v in values:
        out = out * v
    return out


def _pole_guard(value: Any, scale: Any, what: str) -> None:
    if abs(value) <= 1e-14 * max(1.0, float(abs(scale))):
        raise PoleHit(f"root sits on the pole {what}")


def residual(roots: Sequence[Any], system: BetheSystem) -> Residual:
    """Cleared-denominator and log residuals of the convention's own equation."""
    p = system.params
    ar = p.ar
    s = [ar.c(x) for x in roots]
    if len(s) != system.k:
        raise ValueError(f"expected {system.k} roots, got {len(s)}")
    a, h, r, z = p.a_w, p.hbar_w, p.sqrt_hbar_w, ar.c(system.z)
    n = system.n
    one = ar.c(1)
    cleared, logs = [], []
    for i, si in enumerate(s):
        others = [sj for j, sj in enumerate(s) if j != i]
        if system.convention in ("geometric", "saddle"):
            num_a = _prod((si - aj for aj in a), one)
            den_a = _prod((h * aj - si for aj in a), one)
            num_s = _prod((si * h - sj for sj in others), one)
            den_s = _prod((si - sj * h for sj in others), one)
            rhs_c = z * r ** (-n)
            cleared.append(num_a * den_s - rhs_c * den_a * num_s)
            for aj in a:
                _pole_guard(h * aj - si, si, "hbar a_j")
            for sj in others:
                _pole_guard(si - sj * h, si, "s_j hbar")
                _pole_guard(si * h - sj, si, "s_j / hbar")
            lhs, rhs = num_a / den_a, rhs_c * num_s / den_s
        else:
            num_a = _prod((aj / h - si for aj in a), one)
            den_a = _prod((aj - si for aj in a), one)
            num_s = _prod((si - sj / h for sj in others), one)
            den_s = _prod((si / h - sj for sj in others), one)
            if system.convention == "aba" and z == 0:
                # at zero twist the roots sit on a_j; only the cleared form is meaningful
                cleared.append(-(r ** (-n)) * den_a * num_s)
                logs.append(ar.c(0) if cleared[-1] == 0 else ar.c(float("inf")))
                continue
            for aj in a:
                _pole_guard(aj - si, si, "a_j")
            for sj in others:
                _pole_guard(si / h - sj, si, "s_j hbar")
                _pole_guard(si - sj / h, si, "s_j / hbar")
            if system.convention == "aba":
                # LHS = z^{-1} hbar^{-n/2} (...); multiply through by z
                cleared.append(z * num_a * den_s - r ** (-n) * den_a * num_s)
                lhs, rhs = z * num_a / den_a, r ** (-n) * num_s / den_s
            else:
                cleared.append(num_a * den_s - z * r ** (-n) * den_a * num_s)
                lhs, rhs = num_a / den_a, z * r ** (-n) * num_s / den_s
        if rhs == 0 and lhs == 0:
            logs.append(ar.c(0))
        elif rhs == 0 or lhs == 0:
            logs.append(ar.c(float("inf")))
        else:
            logs.append(ar.log(lhs / rhs))
    return Residual(tuple(cleared), tuple(logs))


def relative_residual(roots: Sequence[Any], system: BetheSystem) -> float:
    """Scale-free residual of the canonical form (used for convergence)."""
    return _canonical_rel_residual(list(roots), system.canonical(), system.canonical().w)


# ---------------------------------------------------------------------------
# canonical residual, Jacobian and Newton


def _loo_products(factors: list[Any], one: Any) -> tuple[Any, list[Any]]:
    """Full product and leave-one-out products without division."""
    m = len(factors)
    prefix = [one]
    for f in factors:
        prefix.append(prefix[-1] * f)
    suffix = [one] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] * factors[i]
    return prefix[m], [prefix[i] * suffix[i + 1] for i in range(m)]


def _canonical_terms(s: list[Any], cf: CanonicalForm, w: Any):
    """Row-scaled residual R_i = (P_i - c Q_i)/scale_i, its Jacobian, dR/dw and scales.

    P_i = prod_j (s_i - a_j) prod_{j!=i} (s_i - h s_j),
    Q_i = prod_j (h a_j - s_i) prod_{j!=i} (h s_i - s_j),  c = w r^{-n}.
    Scaling each row by |P_i| + |c Q_i| keeps huge roots well conditioned; the
    scale is floored at the rounding level of the factor products, so a root
    that agrees with a_j to every stored digit counts as converged.
    """
    if not cf.ar.is_mp:
        return _canonical_terms_np(s, cf, w)
    ar, a, h = cf.ar, cf.a, cf.h
    one = ar.c(1)
    k = len(s)
    rn = cf.r ** (-cf.n)
    c = w * rn
    R, dR_dw, scale = [], [], []
    J = [[ar.c(0) for _ in range(k)] for _ in range(k)]
    na = len(a)
    for i in range(k):
        others = [j for j in range(k) if j != i]
        pf = [s[i] - aj for aj in a] + [s[i] - s[j] * h for j in others]
        qf = [h * aj - s[i] for aj in a] + [s[i] * h - s[j] for j in others]
        P, Ploo = _loo_products(pf, one)
        Q, Qloo = _loo_products(qf, one)
        sa, ha = abs(s[i]), abs(h)
        mag = (_prod((sa + abs(aj) for aj in a), 1) * _prod((sa + ha * abs(s[j]) for j in others), 1)
               + abs(c) * _prod((ha * abs(aj) + sa for aj in a), 1) * _prod((ha * sa + abs(s[j]) for j in others), 1))
        sc = max(abs(P) + abs(c * Q), ar.eps * mag)
        sc = sc if sc > 0 else ar.c(1).real
        R.append((P - c * Q) / sc)
        scale.append(sc)
        dR_dw.append(-rn * Q / sc)
        dP = sum(Ploo, ar.c(0))
        dQ = -sum(Qloo[:na], ar.c(0)) + h * sum(Qloo[na:], ar.c(0))
        J[i][i] = (dP - c * dQ) / sc
        for pos, j in enumerate(others):
            J[i][j] = (-h * Ploo[na + pos] + c * Qloo[na + pos]) / sc
    return R, J, dR_dw, scale


def _loo_np(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row products and leave-one-out products of a (k, m) factor matrix."""
    k, m = F.shape
    pre = np.ones((k, m + 1), dtype=np.complex128)
    pre[:, 1:] = np.cumprod(F, axis=1)
    suf = np.ones((k, m + 1), dtype=np.complex128)
    suf[:, :-1] = np.cumprod(F[:, ::-1], axis=1)[:, ::-1]
    return pre[:, m], pre[:, :m] * suf[:, 1:]


def _factor_magnitude(sa: np.ndarray, aa: np.ndarray, ha: float, off: np.ndarray, c: float) -> np.ndarray:
    """Row sums of |terms| of P_i and c Q_i: the rounding scale of the residual."""
    k = len(sa)
    pm = np.concatenate([sa[:, None] + aa[None, :], (sa[:, None] + ha * sa[None, :])[off].reshape(k, k - 1)], axis=1)
    qm = np.concatenate([ha * aa[None, :] + sa[:, None], (ha * sa[:, None] + sa[None, :])[off].reshape(k, k - 1)],
                        axis=1)
    return np.prod(pm, axis=1) + c * np.prod(qm, axis=1)


def _canonical_terms_np(s: list[Any], cf: CanonicalForm, w: Any):
    sv = np.asarray(s, dtype=np.complex128)
    a = np.asarray(cf.a, dtype=np.complex128)
    h = complex(cf.h)
    k, na = len(sv), len(a)
    rn = complex(cf.r) ** (-cf.n)
    c = complex(w) * rn
    off = ~np.eye(k, dtype=bool)
    # pair factors for j != i, laid out row by row
    pd = (sv[:, None] - h * sv[None, :])[off].reshape(k, k - 1)
    qd = (h * sv[:, None] - sv[None, :])[off].reshape(k, k - 1)
    PF = np.concatenate([sv[:, None] - a[None, :], pd], axis=1)
    QF = np.concatenate([h * a[None, :] - sv[:, None], qd], axis=1)
    with np.errstate(over="ignore", invalid="ignore"):
        P, Ploo = _loo_np(PF)
        Q, Qloo = _loo_np(QF)
        mag = _factor_magnitude(np.abs(sv), np.abs(a), abs(h), off, abs(c))
        sc = np.maximum(np.abs(P) + np.abs(c * Q), EPS_DOUBLE * mag)
        sc = np.where(sc > 0, sc, 1.0)
        # far from the roots the products may overflow; non-finite values reject the step
        R = (P - c * Q) / sc
        dR_dw = -rn * Q / sc
        J = np.zeros((k, k), dtype=np.complex128)
        diag = Ploo.sum(axis=1) - c * (-Qloo[:, :na].sum(axis=1) + h * Qloo[:, na:].sum(axis=1))
        J[np.arange(k), np.arange(k)] = diag
        offJ = -h * Ploo[:, na:] + c * Qloo[:, na:]
        J[off] = offJ.reshape(-1)
        J = J / sc[:, None]
    return list(R), J, list(dR_dw), list(sc)


def _canonical_rel_residual(s: list[Any], cf: CanonicalForm, w: Any) -> float:
    if not s:
        return 0.0
    R, _, _, _ = _canonical_terms(s, cf, w)
    return max(float(abs(Ri)) for Ri in R)


def _solve_linear(J: Any, rhs: list[Any], ar: Arith) -> list[Any] | None:
    if ar.is_mp:
        ctx = ar.ctx
        try:
            sol = ctx.lu_solve(ctx.matrix([list(row) for row in J]), ctx.matrix(rhs))
        except ZeroDivisionError:
            return None
        return [sol[i] for i in range(len(rhs))]
    Jm = np.asarray(J, dtype=np.complex128)
    b = np.array(rhs, dtype=np.complex128)
    if not (np.all(np.isfinite(Jm)) and np.all(np.isfinite(b))):
        return None
    try:
        if np.linalg.cond(Jm) > 1e14:
            return None
        return list(np.linalg.solve(Jm, b))
    except np.linalg.LinAlgError:
        return None


def _use_log(s: list[Any]) -> bool:
    scale = max((abs(x) for x in s), default=1.0)
    return all(abs(x) > 1e-8 * max(1.0, float(scale)) for x in s)


def _newton(s: list[Any], cf: CanonicalForm, w: Any, tol: float, iters: int,
            max_first: float | None = None) -> tuple[list[Any], float, bool]:
    """Newton on the cleared residual, in log coordinates when safe."""
    ar = cf.ar
    s = list(s)
    res = _canonical_rel_residual(s, cf, w)
    for it in range(iters):
        if res < tol:
            return s, res, True
        R, J, _, _ = _canonical_terms(s, cf, w)
        log_mode = _use_log(s)
        if log_mode:
            if isinstance(J, np.ndarray):
                J = J * np.asarray(s, dtype=np.complex128)[None, :]
            else:
                J = [[J[i][j] * s[j] for j in range(len(s))] for i in range(len(s))]
        step = _solve_linear(J, [-x for x in R], ar)
        if step is None:
            return s, res, False
        if it == 0 and max_first is not None:
            size = max(float(abs(d)) for d in step) if log_mode else max(
                float(abs(d)) / max(float(abs(x)), 1e-300) for d, x in zip(step, s))
            if size > max_first:
                return s, res, False
        if log_mode:
            s = [x * ar.exp(d) for x, d in zip(s, step)]
        else:
            s = [x + d for x, d in zip(s, step)]
        new_res = _canonical_rel_residual(s, cf, w)
        if it >= 2 and new_res > 0.5 * res and new_res > tol:
            res = new_res
            return s, res, new_res < tol
        res = new_res
    return s, res, res < tol


def _tangent(s: list[Any], cf: CanonicalForm, w: Any, dw: Any) -> list[Any] | None:
    R, J, dRdw, _ = _canonical_terms(s, cf, w)
    with np.errstate(over="ignore", invalid="ignore"):
        rhs = [-d * dw for d in dRdw]
    return _solve_linear(J, rhs, cf.ar)


def _collision(s: list[Any], h: Any, tol: float) -> str | None:
    for i in range(len(s)):
        for j in range(len(s)):
            if i == j:
                continue
            scale = max(abs(s[i]), abs(s[j]))
            for target, what in ((s[j], "s_j"), (h * s[j], "hbar s_j")):
                if abs(s[i] - target) <= tol * float(scale):
                    return f"root {i} approaches {what} (j={j})"
    return None


def _separation(s: list[Any], i: int, cf: CanonicalForm) -> float:
    """Distance from s_i to the nearest locus where the path could jump."""
    si = s[i]
    # crossing s = 0 is harmless, so |s_i| is floored at the scale of the a_j
    d = max(float(abs(si)), 0.1 * min(float(abs(x)) for x in cf.a))
    for j, sj in enumerate(s):
        if j != i:
            d = min(d, float(abs(si - sj)), float(abs(si - cf.h * sj)), float(abs(sj - cf.h * si)))
    return max(d, 1e-300)


def canonical_sort(roots: Iterable[Any]) -> tuple[Any, ...]:
    return tuple(sorted(roots, key=lambda v: (float(complex(v).real), float(complex(v).imag))))


def classical_solutions(n: int, k: int, params: ModelParams) -> list[tuple[Any, ...]]:
    """All k-subsets of {a_j} in canonical fixed-point order."""
    from .core.space import sector_masks

    out = []
    for mask in sector_masks(n, k):
        out.append(tuple(params.a_w[i] for i in range(n) if mask >> i & 1))
    return out


def _origin_roots(origin: int | Sequence[int], cf: CanonicalForm) -> tuple[int, list[Any]]:
    if isinstance(origin, (int, np.integer)):
        mask = int(origin)
        idx = [i for i in range(cf.n) if mask >> i & 1]
    else:
        idx = sorted(int(i) for i in origin)
        mask = sum(1 << i for i in idx)
    return mask, [cf.a[i] for i in idx]


def _track(s0: list[Any], cf: CanonicalForm, control: StepControl) -> tuple[list[Any], int]:
    """Follow w(t) = w_target (t + detour t (1 - t)) from t=0 to t=1."""
    ar = cf.ar
    w_target = cf.w
    gamma = ar.c(control.detour)

    def w_of(t: float) -> Any:
        return w_target * (t + gamma * t * (1 - t))

    def dw_of(t: float) -> Any:
        return w_target * (1 + gamma * (1 - 2 * t))

    s = list(s0)
    t, dt = 0.0, control.initial_step
    steps, clean = 0, 0
    last_collision = ""
    while t < 1.0:
        steps += 1
        if steps > control.max_steps:
            raise StepUnderflow("continuation exceeded its step budget")
        dt = min(dt, 1.0 - t)
        tang = _tangent(s, cf, w_of(t), dw_of(t))
        ok = False
        if tang is not None:
            # no root may move more than a fraction of its separation per step
            speed = max(float(abs(d)) / _separation(s, i, cf) for i, d in enumerate(tang))
            if speed * dt > control.max_relative_move:
                dt = control.max_relative_move / speed
            pred = [x + d * dt for x, d in zip(s, tang)]
            t_new = t + dt if t + dt < 1.0 - 1e-15 else 1.0
            corr, res, ok = _newton(pred, cf, w_of(t_new), control.path_tol, control.newton_iters, max_first=0.1)
            if ok:
                why = _collision(corr, cf.h, control.collision_tol)
                if why is not None:
                    ok, last_collision = False, f"{why} at t={t_new:.6g}"
        if ok:
            s, t = corr, t_new
            clean += 1
            if clean >= 3:
                dt = min(2 * dt, control.max_step)
                clean = 0
        else:
            dt /= 2
            clean = 0
            if dt < control.min_step:
                if last_collision:
                    raise PathCollision(last_collision)
                raise StepUnderflow(f"step size fell below {control.min_step} at t={t:.6g}")
    return s, steps


def _polish(s: list[Any], cf: CanonicalForm, control: StepControl, target_bits: int,
            system: BetheSystem | None = None) -> tuple[list[Any], float, int]:
    """Final Newton; escalate to higher precision when double stagnates.

    With ``system`` the escalated equation is rebuilt from the parameters at
    full precision instead of from the rounded double data in ``cf``.
    """
    tol = control.final_tol if target_bits <= 53 else 2.0 ** (-target_bits) * 1e3
    if target_bits <= 53:
        s, res, ok = _newton(s, cf, cf.w, tol, 20)
        if ok:
            return s, res, 53
    bits = max(target_bits, control.escalate_bits)
    hi = arith(bits)
    if system is not None and system.params.precision_bits >= bits:
        cf_hi = system.canonical(hi)
    else:
        cf_hi = CanonicalForm(tuple(hi.c(x) for x in cf.a), hi.c(cf.h), hi.c(cf.r), hi.c(cf.w), hi)
    s_hi, res_hi, ok = _newton([hi.c(x) for x in s], cf_hi, cf_hi.w, 2.0 ** (-bits) * 1e3, 60)
    if target_bits <= 53:
        s_lo = [complex(x) for x in s_hi]
        return s_lo, _canonical_rel_residual(s_lo, cf, cf.w), bits
    return s_hi, res_hi, bits


def continue_solution(origin_subset: int | Sequence[int], z_target: Any, system: BetheSystem,
                      step_control: StepControl | None = None) -> BetheSolution:
    """Track the solution that starts at a fixed point (z=0) out to z_target."""
    control = step_control or StepControl()
    target = system.with_z(z_target)
    p = system.params
    lo = arith(53)
    cf = target.canonical(lo)
    mask, s0 = _origin_roots(origin_subset, cf)
    if len(s0) != system.k:
        raise ValueError(f"origin has {len(s0)} elements, system expects k={system.k}")
    if complex(z_target) == 0 or system.k == 0:
        roots = [p.ar.c(x) for x in target.canonical().a]
        roots = [roots[i] for i in range(system.n) if mask >> i & 1]
        return BetheSolution(canonical_sort(roots), p.ar.c(z_target), 0.0, mask, 0, system.convention,
                             p.precision_bits)
    s, steps = _track(s0, cf, control)
    s, res, bits = _polish(s, cf, control, p.precision_bits, target)
    if p.precision_bits > 53:
        cf_w = target.canonical()
        s = [p.ar.c(x) for x in s]
        res = _canonical_rel_residual(s, cf_w, cf_w.w)
        tol = 2.0 ** (-p.precision_bits) * 1e4
    else:
        # roots confirmed at escalated precision are accepted once rounded
        tol = control.final_tol if bits == 53 else 1e-10
    if res > tol:
        raise StepUnderflow(f"Newton stagnated at residual {res:.3g}")
    why = _collision(s, cf.h, control.collision_tol)
    if why is not None:
        raise PathCollision(why)
    return BetheSolution(canonical_sort(s), p.ar.c(z_target), float(res), mask, steps, system.convention,
                         max(bits, p.precision_bits))


DETOURS = (0.0, 0.6j, -0.6j, 1.2 + 0.8j, 1.2 - 0.8j, -0.5 + 1.5j, -0.5 - 1.5j, 2.0j, -2.0j)


def _same_multiset(r1: Sequence[Any], r2: Sequence[Any], tol: float) -> bool:
    if len(r1) != len(r2):
        return False
    remaining = list(r2)
    for x in r1:
        best = min(range(len(remaining)), key=lambda j: abs(x - remaining[j]))
        if abs(x - remaining[best]) > tol * max(1.0, float(abs(x))):
            return False
        remaining.pop(best)
    return True


def solve_all(system: BetheSystem, control: StepControl | None = None, dedup_tol: float = 1e-8,
              origins: Sequence[int] | None = None) -> SolutionSet:
    """All C(n,k) solutions by continuation from every fixed point.

    Origins whose path fails or lands on an already-found solution are
    retried along detoured paths; IncompleteSet is raised if the distinct
    count is still short.
    """
    from .core.space import sector_masks

    control = control or StepControl()
    n, k = system.n, system.k
    p = system.params
    masks = list(origins) if origins is not None else list(sector_masks(n, k))
    found: list[BetheSolution] = []
    warnings: list[str] = []
    expected = comb(n, k) if origins is None else len(masks)
    failed: dict[int, str] = {}
    for round_no, detour in enumerate(DETOURS):
        if len(found) >= expected:
            break
        ctl = StepControl(**{**control.__dict__, "detour": detour})
        # later rounds run origins without a solution first, then the rest:
        # a detour may wind around a branch point and permute endpoints
        owners = {f.origin for f in found}
        order = [m for m in masks if m not in owners] + [m for m in masks if m in owners]
        for mask in order:
            try:
                sol = continue_solution(mask, system.z, system, ctl)
            except (PathCollision, StepUnderflow) as exc:
                failed[mask] = str(exc)
                continue
            if any(_same_multiset(sol.roots, f.roots, dedup_tol) for f in found):
                if round_no == 0 and p.genericity.generic:
                    warnings.append(f"origin {mask} merged with another solution on the straight path")
                continue
            found.append(sol)
            failed.pop(mask, None)
            if len(found) >= expected:
                break
    for mask, why in sorted(failed.items()):
        if mask not in {f.origin for f in found}:
            warnings.append(f"origin {mask}: {why}")
    found.sort(key=lambda s: (s.origin, [(complex(x).real, complex(x).imag) for x in s.roots]))
    complete = len(found) == expected
    result = SolutionSet(n, k, p.ar.c(system.z), system.convention, p.digest(), tuple(found), complete,
                         tuple(warnings))
    if not complete:
        err = IncompleteSet(f"found {len(found)} of {expected} solutions at n={n}, k={k}, z={complex(system.z)}")
        err.partial = result  # type: ignore[attr-defined]
        raise err
    return result


def symmetric_eval(spec: SymmetricFunctionSpec, roots: Sequence[Any]) -> Any:
    return spec(roots)


# ---------------------------------------------------------------------------
# solution cache: JSON lines, complex numbers as re+imi strings


def default_cache_dir() -> str:
    return os.environ.get(CACHE_ENV, os.path.join(os.getcwd(), ".xxzqk_cache"))


def solution_records(sets: Iterable[SolutionSet], params: ModelParams) -> list[dict[str, Any]]:
    ar = params.ar
    records: list[dict[str, Any]] = [{"record": "header", "params": params.canonical(),
                                      "params_hash": params.digest()}]
    for sset in sets:
        for sol in sset.solutions:
            records.append({
                "record": "solution",
                "n": sset.n,
                "k": sset.k,
                "z": ar.format(sset.z),
                "convention": sset.convention,
                "params_hash": sset.params_hash,
                "roots": [ar.format(x) for x in sol.roots],
                "residual": repr(float(sol.residual_norm)),
                "origin_mask": sol.origin,
                "path_steps": sol.path_steps,
                "precision_bits": sol.precision_bits,
            })
    return records


def save_solutions(path: str, sets: Iterable[SolutionSet], params: ModelParams) -> None:
    lines = [json.dumps(r, sort_keys=True) for r in solution_records(sets, params)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_solutions(path: str, params: ModelParams | None = None) -> tuple[dict[str, Any], list[SolutionSet]]:
    """Read a cache; returns (header, solution sets grouped by (k, z, convention)).

    If params are given, records with a different params hash are rejected.
    """
    with open(path, encoding="utf-8") as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    if not records or records[0].get("record") != "header":
        raise ValueError(f"{path} is not a solution cache")
    header = records[0]
    bits = int(header["params"]["precision_bits"])
    ar = arith(bits)
    if params is not None and header["params_hash"] != params.digest():
        raise ValueError("cache was written for different parameters")
    groups: dict[tuple, list[BetheSolution]] = {}
    meta: dict[tuple, tuple] = {}
    for rec in records[1:]:
        key = (rec["n"], rec["k"], rec["z"], rec["convention"])
        z = ar.parse(rec["z"])
        sol = BetheSolution(tuple(ar.parse(x) for x in rec["roots"]), z, float(rec["residual"]),
                            int(rec["origin_mask"]), int(rec["path_steps"]), rec["convention"],
                            int(rec.get("precision_bits", bits)))
        groups.setdefault(key, []).append(sol)
        meta[key] = (rec["n"], rec["k"], z, rec["convention"], rec["params_hash"])
    sets = []
    for key, sols in groups.items():
        n, k, z, conv, h = meta[key]
        sets.append(SolutionSet(n, k, z, conv, h, tuple(sols), len(sols) == comb(n, k)))
    return header, sets
