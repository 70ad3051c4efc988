"""Truncated formal power series with scalar or operator coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

from ..errors import BaseDegenerate
from .scalars import Arith, arith
from .space import GradedOperator

VARIABLES = ("x", "z", "u_inv")


@dataclass(frozen=True)
class PowerSeries:
    """c_0 + c_1 t + ... + c_M t^M, exact through order M."""

    coeffs: tuple[Any, ...]
    var: str = "x"

    def __post_init__(self) -> None:
        if self.var not in VARIABLES:
            raise ValueError(f"unknown series variable {self.var!r}")
        if not self.coeffs:
            raise ValueError("a series needs at least the constant coefficient")

    @classmethod
    def of(cls, coeffs: Sequence[Any], var: str = "x") -> "PowerSeries":
        return cls(tuple(coeffs), var)

    @classmethod
    def constant(cls, c: Any, order: int, var: str = "x", ar: Arith | None = None) -> "PowerSeries":
        ar = ar or arith()
        return cls(tuple([ar.c(c)] + [ar.c(0)] * order), var)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, m: int) -> Any:
        return self.coeffs[m]

    def _match(self, other: "PowerSeries") -> int:
        if other.var != self.var:
            raise ValueError("series in different variables")
        return min(self.order, other.order)

    def truncate(self, order: int) -> "PowerSeries":
        return PowerSeries(self.coeffs[: order + 1], self.var)

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        m = self._match(other)
        return PowerSeries(tuple(self[i] + other[i] for i in range(m + 1)), self.var)

    def __neg__(self) -> "PowerSeries":
        return PowerSeries(tuple(-c for c in self.coeffs), self.var)

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        return self + (-other)

    def scale(self, c: Any) -> "PowerSeries":
        return PowerSeries(tuple(c * v for v in self.coeffs), self.var)

    def __mul__(self, other: Any) -> "PowerSeries":
        if not isinstance(other, PowerSeries):
            return self.scale(other)
        m = self._match(other)
        out = []
        for i in range(m + 1):
            acc = self[0] * other[i]
            for j in range(1, i + 1):
                acc = acc + self[j] * other[i - j]
            out.append(acc)
        return PowerSeries(tuple(out), self.var)

    __rmul__ = scale

    def inverse(self) -> "PowerSeries":
        c0 = self[0]
        if c0 == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        out = [1 / c0]
        for i in range(1, self.order + 1):
            acc = self[1] * out[i - 1]
            for j in range(2, i + 1):
                acc = acc + self[j] * out[i - j]
            out.append(-acc / c0)
        return PowerSeries(tuple(out), self.var)

    def __truediv__(self, other: Any) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            return self * other.inverse()
        return self.scale(1 / other)

    def rescale(self, c: Any) -> "PowerSeries":
        """f(t) -> f(c t)."""
        out, p = [], None
        for i, v in enumerate(self.coeffs):
            p = 1 if i == 0 else p * c
            out.append(v * p)
        return PowerSeries(tuple(out), self.var)

    def __call__(self, t: Any) -> Any:
        acc = self.coeffs[-1]
        for v in reversed(self.coeffs[:-1]):
            acc = acc * t + v
        return acc


class OperatorSeries:
    """Truncated series whose coefficients are GradedOperators of one shift."""

    def __init__(self, coeffs: Sequence[GradedOperator], var: str = "x") -> None:
        if not coeffs:
            raise ValueError("a series needs at least the constant coefficient")
        shifts = {c.shift for c in coeffs}
        if len(shifts) != 1:
            raise ValueError("all coefficients must share one shift")
        if var not in VARIABLES:
            raise ValueError(f"unknown series variable {var!r}")
        self.coeffs = tuple(coeffs)
        self.var = var

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def n(self) -> int:
        return self.coeffs[0].n

    def __getitem__(self, m: int) -> GradedOperator:
        return self.coeffs[m]

    def truncate(self, order: int) -> "OperatorSeries":
        return OperatorSeries(self.coeffs[: order + 1], self.var)

    def __add__(self, other: "OperatorSeries") -> "OperatorSeries":
        m = min(self.order, other.order)
        return OperatorSeries([self[i] + other[i] for i in range(m + 1)], self.var)

    def __sub__(self, other: "OperatorSeries") -> "OperatorSeries":
        m = min(self.order, other.order)
        return OperatorSeries([self[i] - other[i] for i in range(m + 1)], self.var)

    def __matmul__(self, other: "OperatorSeries") -> "OperatorSeries":
        """Cauchy product with operator composition, self on the left."""
        m = min(self.order, other.order)
        out = []
        for i in range(m + 1):
            acc = self[0] @ other[i]
            for j in range(1, i + 1):
                acc = acc + self[j] @ other[i - j]
            out.append(acc)
        return OperatorSeries(out, self.var)

    def left(self, op: GradedOperator) -> "OperatorSeries":
        return OperatorSeries([op @ c for c in self.coeffs], self.var)

    def times_scalar_series(self, s: PowerSeries) -> "OperatorSeries":
        m = min(self.order, s.order)
        out = []
        for i in range(m + 1):
            acc = self[0].scale(s[i])
            for j in range(1, i + 1):
                acc = acc + self[j].scale(s[i - j])
            out.append(acc)
        return OperatorSeries(out, self.var)

    def scale(self, c: Any) -> "OperatorSeries":
        return OperatorSeries([x.scale(c) for x in self.coeffs], self.var)

    def rescale(self, c: Any) -> "OperatorSeries":
        """f(t) -> f(c t)."""
        out, p = [], None
        for i, v in enumerate(self.coeffs):
            p = 1 if i == 0 else p * c
            out.append(v.scale(p))
        return OperatorSeries(out, self.var)

    def __call__(self, t: Any) -> GradedOperator:
        acc = self.coeffs[-1]
        for v in reversed(self.coeffs[:-1]):
            acc = acc.scale(t) + v
        return acc

    def residual_by_order(self) -> list[float]:
        return [c.absmax() for c in self.coeffs]


def _root_of_unity_distance(b: Any, max_order: int) -> float:
    return min(abs(b ** j - 1) for j in range(1, max_order + 1))


def q_pochhammer_series(c: Any, b: Any, order: int, ar: Arith | None = None, tol: float = 1e-12,
                        var: str = "x") -> PowerSeries:
    """Series in t of (c t; b)_inf through t^order.

    Uses Euler's finite form: the t^m coefficient is
    (-1)^m b^{m(m-1)/2} c^m / ((1-b)(1-b^2)...(1-b^m)).
    """
    ar = ar or arith()
    c, b = ar.c(c), ar.c(b)
    if order > 0 and _root_of_unity_distance(b, order) < tol:
        raise BaseDegenerate(f"base {complex(b)} is within {tol} of a root of unity")
    coeffs = [ar.c(1)]
    denom = ar.c(1)
    for m in range(1, order + 1):
        denom = denom * (1 - b ** m)
        coeffs.append((-1) ** m * b ** (m * (m - 1) // 2) * c ** m / denom)
    return PowerSeries(tuple(coeffs), var)


def q_pochhammer_inverse_series(c: Any, b: Any, order: int, ar: Arith | None = None, tol: float = 1e-12,
                                var: str = "x") -> PowerSeries:
    """Series of 1/(c t; b)_inf: coefficients c^m / ((1-b)...(1-b^m))."""
    ar = ar or arith()
    c, b = ar.c(c), ar.c(b)
    if order > 0 and _root_of_unity_distance(b, order) < tol:
        raise BaseDegenerate(f"base {complex(b)} is within {tol} of a root of unity")
    coeffs = [ar.c(1)]
    denom = ar.c(1)
    for m in range(1, order + 1):
        denom = denom * (1 - b ** m)
        coeffs.append(c ** m / denom)
    return PowerSeries(tuple(coeffs), var)
