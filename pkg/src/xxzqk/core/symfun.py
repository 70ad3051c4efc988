"""Symmetric Laurent polynomials presented as evaluable data."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Any, Callable, Sequence

KINDS = ("elementary", "power_sum", "weighted_exterior", "custom")


def elementary(values: Sequence[Any], l: int) -> Any:
    """e_l via the product recursion, so no subsets are enumerated."""
    if l < 0 or l > len(values):
        return 0
    e = [1] + [0] * l
    for v in values:
        for j in range(l, 0, -1):
            e[j] = e[j] + v * e[j - 1]
    return e[l]


@dataclass(frozen=True)
class SymmetricFunctionSpec:
    """tau(s_1..s_k) for any arity k.

    ``param`` is l for elementary, m for power_sum (negative m allowed),
    the weight x for weighted_exterior; ``evaluator`` is used by custom and
    must itself be symmetric.
    """

    kind: str
    param: Any = None
    evaluator: Callable[[Sequence[Any]], Any] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown symmetric function kind {self.kind!r}")
        if self.kind == "custom" and self.evaluator is None:
            raise ValueError("custom symmetric functions need an evaluator")

    @classmethod
    def elementary(cls, l: int) -> "SymmetricFunctionSpec":
        return cls("elementary", int(l))

    @classmethod
    def power_sum(cls, m: int) -> "SymmetricFunctionSpec":
        return cls("power_sum", int(m))

    @classmethod
    def weighted_exterior(cls, x: Any) -> "SymmetricFunctionSpec":
        return cls("weighted_exterior", x)

    @classmethod
    def custom(cls, fn: Callable[[Sequence[Any]], Any], name: str = "custom") -> "SymmetricFunctionSpec":
        return cls("custom", name, fn)

    def __call__(self, values: Sequence[Any]) -> Any:
        values = list(values)
        if self.kind == "elementary":
            return elementary(values, self.param)
        if self.kind == "power_sum":
            return sum((v ** self.param for v in values), 0)
        if self.kind == "weighted_exterior":
            out = 1
            for v in values:
                out = out * (1 + self.param * v)
            return out
        return self.evaluator(values)

    def label(self) -> str:
        if self.kind == "custom":
            return str(self.param)
        return f"{self.kind}({self.param})"


def elementary_by_subsets(values: Sequence[Any], l: int) -> Any:
    """Reference e_l by explicit subset sums (used as a test oracle)."""
    total = 0
    for c in combinations(values, l):
        p = 1
        for v in c:
            p = p * v
        total = total + p
    return total
