"""Dense linear algebra helpers used by the region counter and the layers."""
from __future__ import annotations

import numpy as np

DEFAULT_EPS_REL = 1e-9


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def rank_with_tolerance(a, eps_rel: float = DEFAULT_EPS_REL) -> int:
    """Numerical rank by Gaussian elimination with partial pivoting.

    A pivot counts when its magnitude exceeds ``eps_rel`` times the largest
    absolute entry of the input.
    """
    m = as_matrix(a).copy()
    if m.size == 0:
        return 0
    scale = np.abs(m).max()
    if scale == 0.0:
        return 0
    tol = eps_rel * scale
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        p = rank + int(np.argmax(np.abs(m[rank:, c])))
        if abs(m[p, c]) <= tol:
            continue
        if p != rank:
            m[[rank, p]] = m[[p, rank]]
        below = m[rank + 1:, c] / m[rank, c]
        m[rank + 1:, c:] -= np.outer(below, m[rank, c:])
        rank += 1
    return rank


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def vec(a) -> np.ndarray:
    """Column-by-column vectorization."""
    return as_matrix(a).reshape(-1, order="F")


def unvec(x, rows: int, cols: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.size != rows * cols:
        raise ValueError(f"cannot reshape {x.size} entries to {rows}x{cols}")
    return x.reshape((rows, cols), order="F")


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch {a.shape} @ {b.shape}")
    return a @ b


def add(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} + {b.shape}")
    return a + b


def transpose(a) -> np.ndarray:
    return as_matrix(a).T.copy()
