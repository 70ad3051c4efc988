"""The graded fixed-point space and block operators on it.

Basis vectors are subsets of {1..n} stored as bitmasks (bit i <-> a_{i+1}).
Sector k holds the C(n,k) masks of popcount k in increasing integer order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Any, Callable, Mapping

import numpy as np

from .scalars import Arith, absmax, arith


@dataclass(frozen=True, order=True)
class FixedPoint:
    mask: int
    n: int

    @property
    def k(self) -> int:
        return bin(self.mask).count("1")

    @property
    def members(self) -> tuple[int, ...]:
        """Zero-based indices i with a_{i+1} in the subset."""
        return tuple(i for i in range(self.n) if self.mask >> i & 1)

    @property
    def complement(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if not self.mask >> i & 1)

    def label(self) -> str:
        return "{" + ",".join(str(i + 1) for i in self.members) + "}"


@lru_cache(maxsize=None)
def sector_masks(n: int, k: int) -> tuple[int, ...]:
    if not 0 <= k <= n:
        return ()
    return tuple(m for m in range(1 << n) if bin(m).count("1") == k)


@lru_cache(maxsize=None)
def sector_index(n: int, k: int) -> Mapping[int, int]:
    return {m: i for i, m in enumerate(sector_masks(n, k))}


def enumerate_fixed_points(n: int, k: int) -> list[FixedPoint]:
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    return [FixedPoint(m, n) for m in sector_masks(n, k)]


@lru_cache(maxsize=None)
def graded_order(n: int) -> tuple[int, ...]:
    """All masks sorted by (popcount, mask); the dense basis order."""
    return tuple(m for k in range(n + 1) for m in sector_masks(n, k))


def sector_offset(n: int, k: int) -> int:
    return sum(comb(n, j) for j in range(k))


class GradedOperator:
    """Linear map sending sector k to sector k + shift, stored as dense blocks.

    Blocks are read-only; every operation returns a new operator.
    """

    __slots__ = ("n", "shift", "blocks", "ar")

    def __init__(self, n: int, shift: int, blocks: Mapping[int, np.ndarray], ar: Arith | None = None):
        self.n = n
        self.shift = shift
        self.ar = ar or arith()
        full = {}
        for k in self.sectors():
            shape = (comb(n, k + shift), comb(n, k))
            blk = blocks.get(k)
            if blk is None:
                blk = self.ar.zeros(shape)
            elif blk.shape != shape:
                raise ValueError(f"block {k} has shape {blk.shape}, expected {shape}")
            blk = np.array(blk, dtype=self.ar.dtype)
            blk.flags.writeable = False
            full[k] = blk
        for k in blocks:
            if k not in full:
                raise ValueError(f"sector {k} is invalid for shift {shift} at n={n}")
        self.blocks = full

    def sectors(self) -> range:
        return range(max(0, -self.shift), min(self.n, self.n - self.shift) + 1)

    # constructors --------------------------------------------------------------
    @classmethod
    def zero(cls, n: int, shift: int = 0, ar: Arith | None = None) -> "GradedOperator":
        return cls(n, shift, {}, ar)

    @classmethod
    def identity(cls, n: int, ar: Arith | None = None) -> "GradedOperator":
        ar = ar or arith()
        return cls(n, 0, {k: ar.eye(comb(n, k)) for k in range(n + 1)}, ar)

    @classmethod
    def diagonal(cls, n: int, value: Callable[[FixedPoint], Any], ar: Arith | None = None) -> "GradedOperator":
        """Diagonal operator with eigenvalue value(p) at each fixed point."""
        ar = ar or arith()
        blocks = {}
        for k in range(n + 1):
            pts = enumerate_fixed_points(n, k)
            blk = ar.zeros((len(pts), len(pts)))
            for i, p in enumerate(pts):
                blk[i, i] = ar.c(value(p))
            blocks[k] = blk
        return cls(n, 0, blocks, ar)

    @classmethod
    def sector_scalar(cls, n: int, value: Callable[[int], Any], ar: Arith | None = None) -> "GradedOperator":
        """Operator acting on sector k as the scalar value(k)."""
        ar = ar or arith()
        return cls(n, 0, {k: ar.eye(comb(n, k)) * ar.c(value(k)) for k in range(n + 1)}, ar)

    @classmethod
    def from_dense(cls, dense: np.ndarray, n: int, shift: int, ar: Arith | None = None) -> "GradedOperator":
        """Slice a 2^n x 2^n matrix indexed by raw masks into blocks."""
        blocks = {}
        for k in range(max(0, -shift), min(n, n - shift) + 1):
            rows = list(sector_masks(n, k + shift))
            cols = list(sector_masks(n, k))
            blocks[k] = dense[np.ix_(rows, cols)]
        return cls(n, shift, blocks, ar)

    # algebra -------------------------------------------------------------------
    def _check(self, other: "GradedOperator") -> None:
        if other.n != self.n:
            raise ValueError("operators act on different chains")

    def __add__(self, other: "GradedOperator") -> "GradedOperator":
        self._check(other)
        if other.shift != self.shift:
            raise ValueError("cannot add operators with different shifts")
        return GradedOperator(self.n, self.shift, {k: self.blocks[k] + other.blocks[k] for k in self.blocks}, self.ar)

    def __neg__(self) -> "GradedOperator":
        return GradedOperator(self.n, self.shift, {k: -b for k, b in self.blocks.items()}, self.ar)

    def __sub__(self, other: "GradedOperator") -> "GradedOperator":
        return self + (-other)

    def scale(self, c: Any) -> "GradedOperator":
        c = self.ar.c(c)
        return GradedOperator(self.n, self.shift, {k: b * c for k, b in self.blocks.items()}, self.ar)

    def __mul__(self, c: Any) -> "GradedOperator":
        if isinstance(c, GradedOperator):
            return self @ c
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: Any) -> Any:
        if isinstance(other, GradedOperator):
            self._check(other)
            shift = self.shift + other.shift
            blocks = {}
            for k in other.sectors():
                mid = k + other.shift
                if mid in self.blocks:
                    blocks[k] = self.blocks[mid] @ other.blocks[k]
            return GradedOperator(self.n, shift, blocks, self.ar)
        return NotImplemented

    def sector_map(self, fn: Callable[[int], Any]) -> "GradedOperator":
        """Left-multiply block k by the sector scalar fn(k + shift)."""
        return GradedOperator(
            self.n, self.shift, {k: b * self.ar.c(fn(k + self.shift)) for k, b in self.blocks.items()}, self.ar
        )

    def power(self, m: int) -> "GradedOperator":
        if m == 0:
            return GradedOperator.identity(self.n, self.ar)
        out = self
        for _ in range(m - 1):
            out = out @ self
        return out

    def commutator(self, other: "GradedOperator") -> "GradedOperator":
        if self.is_diagonal() and other.is_diagonal():
            # scalar products commute exactly; BLAS products of the full blocks need not
            return GradedOperator.zero(self.n, 0, self.ar)
        return self @ other - other @ self

    def apply(self, k: int, vec: np.ndarray) -> np.ndarray:
        """Act on a vector living in sector k; the result lives in k + shift."""
        if k not in self.blocks:
            return self.ar.zeros(comb(self.n, k + self.shift) if 0 <= k + self.shift <= self.n else 0)
        return self.blocks[k] @ vec

    def block(self, k: int) -> np.ndarray:
        return self.blocks[k]

    def absmax(self) -> float:
        return max((absmax(b) for b in self.blocks.values()), default=0.0)

    def is_diagonal(self) -> bool:
        if self.shift != 0:
            return False
        for b in self.blocks.values():
            off = b - np.diag(np.diag(b))
            if absmax(off) != 0:
                return False
        return True

    def to_dense(self) -> np.ndarray:
        """2^n x 2^n matrix indexed by raw masks; inverse of ``from_dense``."""
        dim = 1 << self.n
        out = self.ar.zeros((dim, dim))
        for k, b in self.blocks.items():
            rows = list(sector_masks(self.n, k + self.shift))
            cols = list(sector_masks(self.n, k))
            out[np.ix_(rows, cols)] = b
        return out

    def to_complex(self) -> "GradedOperator":
        """Round to double precision."""
        ar = arith()
        return GradedOperator(
            self.n, self.shift, {k: np.array(b, dtype=np.complex128) for k, b in self.blocks.items()}, ar
        )

    def __repr__(self) -> str:
        return f"GradedOperator(n={self.n}, shift={self.shift}, max={self.absmax():.3g})"
