"""Small dense linear-algebra helpers."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .scalars import Arith, arith


def gram_rank(vectors: Sequence[np.ndarray], tol: float = 1e-8) -> int:
    """Numerical rank of a family of vectors, scale-invariant.

    Each vector is normalized first; the rank counts singular values above
    tol times the largest one.
    """
    if len(vectors) == 0:
        return 0
    mat = np.array([np.asarray(v, dtype=np.complex128) for v in vectors])
    if mat.ndim != 2:
        raise ValueError("vectors must share one dimension")
    norms = np.linalg.norm(mat, axis=1)
    keep = norms > 0
    if not keep.any():
        return 0
    mat = mat[keep] / norms[keep, None]
    sv = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(sv > tol * sv[0]))


def null_vector(mat: np.ndarray) -> tuple[np.ndarray, float]:
    """Right singular vector of the smallest singular value and that value."""
    _, sv, vh = np.linalg.svd(np.asarray(mat, dtype=np.complex128))
    return vh[-1].conj(), float(sv[-1])


def inverse(mat: np.ndarray, ar: Arith | None = None) -> np.ndarray:
    """Matrix inverse at the working precision of ``ar``."""
    ar = ar or arith()
    if not ar.is_mp:
        return np.linalg.inv(np.asarray(mat, dtype=np.complex128))
    ctx = ar.ctx
    inv = ctx.matrix([list(row) for row in mat]) ** -1
    rows, cols = mat.shape
    out = ar.zeros((rows, cols))
    for i in range(rows):
        for j in range(cols):
            out[i, j] = inv[i, j]
    return out
