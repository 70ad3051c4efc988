"""Model parameters and their validation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Sequence

from ..errors import DegenerateParameters
from .scalars import DOUBLE_BITS, Arith, arith

DEFAULT_GENERICITY_TOL = 1e-6


@dataclass(frozen=True)
class GenericityReport:
    """Non-fatal warnings about near-resonant parameters."""

    flags: tuple[str, ...] = ()

    @property
    def generic(self) -> bool:
        return not self.flags


@dataclass(frozen=True)
class ModelParams:
    """Chain length, equivariant parameters, anisotropy and precision.

    ``sqrt_hbar`` is stored rather than recomputed so that parameter sets
    obtained by inverting hbar keep a consistent square-root branch.
    """

    n: int
    a: tuple[complex, ...]
    hbar: complex
    q: complex = 0.9
    precision_bits: int = DOUBLE_BITS
    genericity_tol: float = DEFAULT_GENERICITY_TOL
    sqrt_hbar: complex | None = None
    genericity: GenericityReport = field(default=GenericityReport(), compare=False)

    # derived quantities at working precision ------------------------------
    @cached_property
    def ar(self) -> Arith:
        return arith(self.precision_bits)

    @cached_property
    def a_w(self) -> tuple[Any, ...]:
        return tuple(self.ar.c(x) for x in self.a)

    @cached_property
    def hbar_w(self) -> Any:
        return self.ar.c(self.hbar)

    @cached_property
    def sqrt_hbar_w(self) -> Any:
        if self.sqrt_hbar is not None:
            return self.ar.c(self.sqrt_hbar)
        return self.ar.sqrt(self.hbar_w)

    @cached_property
    def hbar_quarter_w(self) -> Any:
        """Principal square root of the chosen hbar^{1/2}."""
        return self.ar.sqrt(self.sqrt_hbar_w)

    @cached_property
    def xi_w(self) -> tuple[Any, ...]:
        """Site inhomogeneities xi_i = a_i^{1/2}, principal branch."""
        return tuple(self.ar.sqrt(x) for x in self.a_w)

    @cached_property
    def q_w(self) -> Any:
        return self.ar.c(self.q)

    @cached_property
    def sqrt_q_w(self) -> Any:
        return self.ar.sqrt(self.q_w)

    def memo(self, key: Any, build: Any) -> Any:
        """Per-instance cache for derived operators (params are immutable)."""
        store = self.__dict__.setdefault("_memo", {})
        if key not in store:
            store[key] = build()
        return store[key]

    def sector_K(self, k: int) -> Any:
        """Eigenvalue hbar^{(n-2k)/2} of K on the k-subset sector."""
        return self.sqrt_hbar_w ** (self.n - 2 * k)

    # variants ---------------------------------------------------------------
    def with_inverse_hbar(self) -> "ModelParams":
        """Same parameters at hbar^{-1}, with hbar^{-1/2} = 1/hbar^{1/2}."""
        return self._derive(
            dict(hbar=1 / complex(self.hbar), sqrt_hbar=1 / complex(self.sqrt_hbar_w)),
            hbar_w=1 / self.hbar_w,
            sqrt_hbar_w=1 / self.sqrt_hbar_w,
        )

    def with_a(self, a: Sequence[Any]) -> "ModelParams":
        return self._derive(
            dict(a=tuple(complex(x) for x in a)), a_w=tuple(self.ar.c(x) for x in a)
        )

    def with_precision(self, bits: int) -> "ModelParams":
        return replace(self, precision_bits=int(bits))

    def _derive(self, fields: dict[str, Any], **seeds: Any) -> "ModelParams":
        # cached_property stores in __dict__; seeding keeps the extra digits
        # that the complex-valued public fields would otherwise round away
        out = replace(self, **fields)
        for key in ("a_w", "hbar_w", "sqrt_hbar_w", "q_w"):
            out.__dict__[key] = seeds.get(key, getattr(self, key))
        return out

    # serialization ------------------------------------------------------------
    def canonical(self) -> dict[str, Any]:
        ar = self.ar
        return {
            "n": self.n,
            "a": [ar.format(x) for x in self.a_w],
            "hbar": ar.format(self.hbar_w),
            "sqrt_hbar": ar.format(self.sqrt_hbar_w),
            "q": ar.format(self.q_w),
            "precision_bits": self.precision_bits,
        }

    def digest(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def genericity_flags(a: Sequence[complex], hbar: complex, tol: float) -> tuple[str, ...]:
    n = len(a)
    flags = []
    h = complex(hbar)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            ratio = complex(a[i]) / complex(a[j])
            for m in range(-2 * n, 2 * n + 1):
                if m == 0:
                    continue
                target = h ** m
                if abs(ratio - target) <= tol * max(1.0, abs(target)):
                    flags.append(f"a{i + 1}/a{j + 1} = hbar^{m}")
    if abs(abs(h) - 1) <= tol:
        flags.append("|hbar| = 1")
    return tuple(flags)


def make_params(
    n: int,
    a: Sequence[complex],
    hbar: complex,
    q: complex = 0.9,
    precision: int = DOUBLE_BITS,
    genericity_tol: float = DEFAULT_GENERICITY_TOL,
) -> ModelParams:
    """Validate inputs and build a ModelParams with its genericity report."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    a = tuple(complex(x) for x in a)
    if len(a) != n:
        raise ValueError(f"expected {n} equivariant parameters, got {len(a)}")
    if complex(hbar) == 0:
        raise DegenerateParameters("hbar must be nonzero")
    if any(x == 0 for x in a):
        raise DegenerateParameters("equivariant parameters must be nonzero")
    scale = max(abs(x) for x in a)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(a[i] - a[j]) / scale <= genericity_tol:
                raise DegenerateParameters(f"a{i + 1} and a{j + 1} coincide")
    report = GenericityReport(genericity_flags(a, hbar, genericity_tol))
    return ModelParams(
        n=int(n),
        a=a,
        hbar=complex(hbar),
        q=complex(q),
        precision_bits=int(precision),
        genericity_tol=float(genericity_tol),
        genericity=report,
    )
