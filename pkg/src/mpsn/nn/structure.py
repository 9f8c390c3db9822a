"""Operators derived from a stack of boundary matrices.

Layers never read a :class:`SimplicialComplex` directly: they consume a
:class:`BoundaryStack` ``(B_1, ..., B_p)``.  Permuting or re-orienting the
complex is then just a transformation of the stack, which is what the
equivariance checks operate on.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from ..complex import SimplicialComplex, boundary_matrix


@dataclass(frozen=True, eq=False)
class BoundaryStack:
    counts: tuple[int, ...]
    boundaries: tuple[sp.csr_matrix, ...]  # boundaries[k-1] is B_k

    def __post_init__(self):
        if len(self.boundaries) != max(len(self.counts) - 1, 0):
            raise ValueError("need one boundary matrix per positive dimension")
        for k, b in enumerate(self.boundaries, start=1):
            if b.shape != (self.counts[k - 1], self.counts[k]):
                raise ValueError(f"B_{k} has shape {b.shape}, expected {(self.counts[k - 1], self.counts[k])}")

    @classmethod
    def from_complex(cls, K: SimplicialComplex) -> "BoundaryStack":
        bs = tuple(boundary_matrix(K, k).to_sparse(np.float64) for k in range(1, K.dim + 1))
        return cls(K.dim_counts, bs)

    @classmethod
    def from_dense(cls, mats) -> "BoundaryStack":
        mats = [np.asarray(m, dtype=np.float64) for m in mats]
        if not mats:
            raise ValueError("use from_complex for 0-dimensional complexes")
        counts = (mats[0].shape[0],) + tuple(m.shape[1] for m in mats)
        return cls(counts, tuple(sp.csr_matrix(m) for m in mats))

    @property
    def dim(self) -> int:
        return len(self.counts) - 1

    def B(self, k: int) -> sp.csr_matrix:
        """``B_k``; empty matrices outside ``1..p``."""
        if 1 <= k <= self.dim:
            return self.boundaries[k - 1]
        rows = self.counts[k - 1] if 0 <= k - 1 <= self.dim else 0
        cols = self.counts[k] if 0 <= k <= self.dim else 0
        return sp.csr_matrix((rows, cols))

    def laplacian(self, k: int, variant: str = "full") -> sp.csr_matrix:
        down = (self.B(k).T @ self.B(k)).tocsr()
        up = (self.B(k + 1) @ self.B(k + 1).T).tocsr()
        return {"down": down, "up": up, "full": (down + up).tocsr()}[variant]

    def shifted_laplacian(self, k: int) -> sp.csr_matrix:
        return (self.laplacian(k) + sp.identity(self.counts[k], format="csr")).tocsr()

    def lower_adjacency(self, k: int, oriented: bool = True) -> sp.csr_matrix:
        """Off-diagonal part of ``B_k^T B_k``: the relative orientations of lower neighbours."""
        return _offdiag(self.laplacian(k, "down"), oriented)

    def upper_adjacency(self, k: int, oriented: bool = True) -> sp.csr_matrix:
        return _offdiag(self.laplacian(k, "up"), oriented)

    @cached_property
    def boundary_index(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """Per dimension ``k``: (simplex, face) index pairs from the nonzeros of ``B_k``."""
        out = [(np.zeros(0, np.int64), np.zeros(0, np.int64))]
        for b in self.boundaries:
            coo = b.tocoo()
            order = np.lexsort((coo.row, coo.col))
            out.append((coo.col[order].astype(np.int64), coo.row[order].astype(np.int64)))
        return tuple(out)

    @cached_property
    def upper_index(self) -> tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]:
        """Per dimension ``k``: (sigma, tau, coface) triples of upper-adjacent k-simplices."""
        out = []
        for k in range(self.dim + 1):
            sig, tau, cof = [], [], []
            if k < self.dim:
                csc = self.boundaries[k].tocsc()
                for c in range(csc.shape[1]):
                    rows = np.sort(csc.indices[csc.indptr[c]:csc.indptr[c + 1]])
                    for a in rows:
                        for b in rows:
                            if a != b:
                                sig.append(a)
                                tau.append(b)
                                cof.append(c)
            out.append(tuple(np.asarray(x, dtype=np.int64) for x in (sig, tau, cof)))
        return tuple(out)

    # -- symmetry actions ----------------------------------------------------

    def permute(self, perms) -> "BoundaryStack":
        """``(P_0 B_1 P_1^T, ...)`` where ``perms[k][i]`` is the new index of simplex ``i``."""
        mats = [_perm_matrix(p) for p in perms]
        bs = tuple((mats[k - 1] @ self.boundaries[k - 1] @ mats[k].T).tocsr()
                   for k in range(1, self.dim + 1))
        return BoundaryStack(self.counts, bs)

    def flip(self, signs) -> "BoundaryStack":
        """``(T_0 B_1 T_1, ...)`` with ``signs[k]`` the diagonal of ``T_k``."""
        ts = [sp.diags(np.asarray(s, dtype=np.float64)) for s in signs]
        bs = tuple((ts[k - 1] @ self.boundaries[k - 1] @ ts[k]).tocsr() for k in range(1, self.dim + 1))
        return BoundaryStack(self.counts, bs)


def _offdiag(m: sp.csr_matrix, oriented: bool) -> sp.csr_matrix:
    m = m.tolil()
    m.setdiag(0)
    m = m.tocsr()
    m.eliminate_zeros()
    return m if oriented else abs(m)


def _perm_matrix(perm) -> sp.csr_matrix:
    perm = np.asarray(perm, dtype=np.int64)
    n = len(perm)
    return sp.csr_matrix((np.ones(n), (perm, np.arange(n))), shape=(n, n))
