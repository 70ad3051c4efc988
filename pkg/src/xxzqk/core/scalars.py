"""Complex scalars at configurable precision.

At 53 bits everything is plain ``complex`` and ``complex128`` arrays.  Above
that, scalars are ``mpc`` values from a private mpmath context and arrays use
``dtype=object`` so numpy operators still work elementwise.
"""

from __future__ import annotations

import cmath
from functools import lru_cache
from typing import Any, Iterable

import mpmath
import numpy as np

DOUBLE_BITS = 53


class Arith:
    """Scalar and array factory for one working precision."""

    def __init__(self, bits: int = DOUBLE_BITS) -> None:
        if bits < DOUBLE_BITS:
            raise ValueError(f"precision must be at least {DOUBLE_BITS} bits, got {bits}")
        self.bits = int(bits)
        self.is_mp = self.bits > DOUBLE_BITS
        if self.is_mp:
            self.ctx = mpmath.MPContext()
            self.ctx.prec = self.bits
        else:
            self.ctx = None

    # scalars -----------------------------------------------------------------
    @property
    def dtype(self) -> Any:
        return object if self.is_mp else np.complex128

    @property
    def eps(self) -> float:
        return 2.0 ** (-self.bits)

    @property
    def digits(self) -> int:
        """Decimal digits that round-trip a real part at this precision."""
        return int(self.bits * 0.30103) + 3

    def c(self, x: Any) -> Any:
        if self.is_mp:
            if isinstance(x, _MpPair):
                return self.ctx.mpc(self.ctx.mpf(x.re), self.ctx.mpf(x.im))
            if isinstance(x, str):
                return self.c(parse_complex(x, as_str=True))
            if hasattr(x, "_mpc_") or hasattr(x, "_mpf_"):
                return self.ctx.mpc(self.ctx.mpf(x.real), self.ctx.mpf(x.imag))
            if not isinstance(x, (int, float, complex)):
                x = complex(x)
            return self.ctx.mpc(x)
        return complex(x)

    def sqrt(self, x: Any) -> Any:
        return self.ctx.sqrt(self.c(x)) if self.is_mp else cmath.sqrt(complex(x))

    def exp(self, x: Any) -> Any:
        return self.ctx.exp(self.c(x)) if self.is_mp else cmath.exp(complex(x))

    def log(self, x: Any) -> Any:
        return self.ctx.log(self.c(x)) if self.is_mp else cmath.log(complex(x))

    def root(self, x: Any, m: int) -> Any:
        """Principal m-th root exp(log(x)/m)."""
        return self.exp(self.log(x) / m)

    def abs(self, x: Any) -> float:
        return float(abs(x))

    def to_complex(self, x: Any) -> complex:
        return complex(x)

    # arrays ------------------------------------------------------------------
    def zeros(self, shape: Any) -> np.ndarray:
        if self.is_mp:
            out = np.empty(shape, dtype=object)
            out.fill(self.ctx.mpc(0))
            return out
        return np.zeros(shape, dtype=np.complex128)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self.c(1)
        return out

    def array(self, values: Iterable[Any]) -> np.ndarray:
        vals = [self.c(v) for v in values]
        if self.is_mp:
            out = np.empty(len(vals), dtype=object)
            out[:] = vals
            return out
        return np.array(vals, dtype=np.complex128)

    def convert(self, arr: np.ndarray) -> np.ndarray:
        """Cast any array to this precision (object arrays stay elementwise)."""
        arr = np.asarray(arr)
        if self.is_mp:
            out = np.empty(arr.shape, dtype=object)
            flat = out.reshape(-1)
            for i, v in enumerate(arr.reshape(-1)):
                flat[i] = self.c(v)
            return out
        return arr.astype(np.complex128)

    def format(self, x: Any) -> str:
        """Render a complex number as ``re+imi`` with round-trip digits."""
        x = self.c(x)
        if self.is_mp:
            re = mpmath.nstr(x.real, self.digits, strip_zeros=False, min_fixed=1, max_fixed=0)
            im = mpmath.nstr(x.imag, self.digits, strip_zeros=False, min_fixed=1, max_fixed=0)
        else:
            re, im = repr(x.real), repr(x.imag)
        if not im.startswith("-"):
            im = "+" + im
        return f"{re}{im}i"

    def parse(self, text: str) -> Any:
        return self.c(parse_complex(text, as_str=self.is_mp))

    def __repr__(self) -> str:
        return f"Arith(bits={self.bits})"


def parse_complex(text: str, as_str: bool = False) -> Any:
    """Parse ``re+imi`` (or a bare real) into a complex number.

    With ``as_str`` the value is returned as an mpmath-compatible string pair
    ``(re, im)`` so no digits are lost to double rounding.
    """
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    if s.endswith("i") or s.endswith("j"):
        body = s[:-1]
        # split at the last sign that is not part of an exponent
        cut = None
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "eE":
                cut = pos
                break
        if cut is None:
            re_s, im_s = "0", body or "1"
        else:
            re_s, im_s = body[:cut], body[cut:]
        if im_s in ("+", "-"):
            im_s += "1"
    else:
        re_s, im_s = s, "0"
    float(re_s), float(im_s)  # validates the literal
    if as_str:
        return _MpPair(re_s, im_s)
    return complex(float(re_s), float(im_s))


class _MpPair:
    """Exact decimal pair handed to an mpmath context without rounding."""

    def __init__(self, re: str, im: str) -> None:
        self.re, self.im = re, im

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))


@lru_cache(maxsize=None)
def arith(bits: int = DOUBLE_BITS) -> Arith:
    """Shared Arith instance per precision."""
    return Arith(bits)


def absmax(arr: Any) -> float:
    """Max-entry norm that works for complex128 and object arrays."""
    arr = np.asarray(arr)
    if arr.size == 0:
        return 0.0
    if arr.dtype == object:
        return float(max(abs(v) for v in arr.reshape(-1)))
    return float(np.max(np.abs(arr)))


def norm2(arr: Any) -> float:
    arr = np.asarray(arr)
    if arr.dtype == object:
        return float(sum(abs(v) ** 2 for v in arr.reshape(-1)) ** 0.5)
    return float(np.linalg.norm(arr))
