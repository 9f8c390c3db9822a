"""Linear-region counts of one ReLU layer via central hyperplane arrangements.

A layer ``Z = sum_j A_j H_j W_j`` is linear in the stacked input
``x = (vec H_0, ..., vec H_p)`` (column-major ``vec``), since
``vec(A H W) = (W^T kron A) vec(H)``.  Its linear regions are the regions of
the central arrangement whose normals are the rows of that matrix.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numba
import numpy as np

from .nn.layers import operator
from .nn.structure import BoundaryStack
from .numerics.linalg import DEFAULT_EPS_REL, kron, rank_with_tolerance

ARCHITECTURES = ("gnn", "scnn", "mpsn")
MAX_WHITNEY_ROWS = 22


class CapacityError(ValueError):
    pass


@dataclass
class Arrangement:
    normals: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.normals.shape


@dataclass(frozen=True)
class RegionCount:
    count: int
    method: str  # whitney | closed_form | slice_lower_bound

    def to_json(self) -> dict:
        return {"count": self.count, "method": self.method}


def _dense(op) -> np.ndarray:
    return op.toarray() if hasattr(op, "toarray") else np.asarray(op, dtype=np.float64)


def build_arrangement(stack: BoundaryStack, arch: str, weights: Sequence[np.ndarray],
                      M: str = "shifted", U: str = "boundary_T", O: str = "coboundary") -> Arrangement:
    """Normals of the pre-activation map of a single layer.

    ``weights[n]`` is ``d_n x m``.  ``gnn`` uses only the vertices, ``scnn``
    the block diagonal ``W_n^T kron M_n`` and ``mpsn`` additionally the
    off-diagonal blocks ``W_{n-1}^T kron U_n`` and ``W_{n+1}^T kron O_n``.
    """
    if arch not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {arch!r}")
    p = 0 if arch == "gnn" else stack.dim
    Ws = [np.atleast_2d(np.asarray(w, dtype=np.float64)) for w in weights]
    if len(Ws) < p + 1:
        raise ValueError(f"need {p + 1} weight matrices, got {len(Ws)}")
    Ws = Ws[:p + 1]
    m = Ws[0].shape[1]
    if any(w.shape[1] != m for w in Ws):
        raise ValueError("all weight matrices must share the output width m")
    S = stack.counts[:p + 1]
    rows = [S[n] * m for n in range(p + 1)]
    cols = [S[n] * Ws[n].shape[0] for n in range(p + 1)]
    out = np.zeros((sum(rows), sum(cols)))
    r0 = np.concatenate([[0], np.cumsum(rows)])
    c0 = np.concatenate([[0], np.cumsum(cols)])
    for n in range(p + 1):
        terms = [(n, M)] if arch != "mpsn" else [(n, M), (n - 1, U), (n + 1, O)]
        for j, kind in terms:
            if not 0 <= j <= p:
                continue
            block = kron(Ws[j].T, _dense(operator(stack, kind, n)))
            out[r0[n]:r0[n + 1], c0[j]:c0[j + 1]] = block
    prov = {"arch": arch, "counts": list(S), "d": [w.shape[0] for w in Ws], "m": m, "M": M}
    if arch == "mpsn":
        prov.update(U=U, O=O)
    return Arrangement(out, prov)


@numba.njit(cache=True)
def _whitney_dfs(W, start, size, rank, Q, tol):
    M, N = W.shape
    if rank == N:
        # every superset has rank N, so the remaining alternating sum vanishes
        if start < M:
            return 0
        return 1 if (size - N) % 2 == 0 else -1
    if start == M:
        return 1 if (size - rank) % 2 == 0 else -1
    total = _whitney_dfs(W, start + 1, size, rank, Q, tol)
    r = W[start].copy()
    for _ in range(2):
        for i in range(rank):
            r -= (r @ Q[i]) * Q[i]
    norm = np.sqrt(r @ r)
    if norm > tol:
        Q[rank] = r / norm
        total += _whitney_dfs(W, start + 1, size + 1, rank + 1, Q, tol)
    else:
        total += _whitney_dfs(W, start + 1, size + 1, rank, Q, tol)
    return total


def whitney_count(A: Arrangement | np.ndarray, eps_rel: float = DEFAULT_EPS_REL,
                  max_rows: int = MAX_WHITNEY_ROWS) -> RegionCount:
    """Exact region count ``sum_B (-1)^(|B| - rank W_B)`` over all row subsets."""
    W = np.asarray(A.normals if isinstance(A, Arrangement) else A, dtype=np.float64)
    if W.ndim != 2:
        raise ValueError("normals must form a matrix")
    scale = np.abs(W).max() if W.size else 0.0
    if scale == 0.0:
        return RegionCount(1, "whitney")
    W = W[np.abs(W).max(axis=1) > 0]
    if len(W) > max_rows:
        raise CapacityError(
            f"{len(W)} hyperplanes exceed the exact-count limit of {max_rows}; "
            "use the closed-form bound or the slice mode instead")
    # unit rows keep the residual test on one scale
    Wn = W / np.linalg.norm(W, axis=1)[:, None]
    tol = eps_rel * np.abs(Wn).max() * np.sqrt(W.shape[1])
    Q = np.zeros((W.shape[1], W.shape[1]))
    return RegionCount(int(_whitney_dfs(Wn, 0, 0, 0, Q, tol)), "whitney")


def generic_count(M: int, N: int) -> int:
    """Regions of ``M`` generic central hyperplanes in ``R^N``."""
    return 2 * sum(comb(M - 1, j) for j in range(N)) if M else 1


def _factor(m: int, d: int) -> int:
    return 2 * sum(comb(m - 1, i) for i in range(d))


def closed_form_bound(arch: str, counts: Sequence[int], dims: Sequence[int], m: int,
                      detail: bool = False):
    """Upper bounds (exact for GNN / SCNN with invertible operators).

    For ``mpsn`` the result is the smaller of the per-dimension product bound
    and the generic-arrangement bound on the full ``M x N`` matrix.
    """
    if arch not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {arch!r}")
    counts = list(counts)
    dims = list(dims)
    if arch == "gnn":
        value = _factor(m, dims[0]) ** counts[0]
        return {"bound": value} if detail else value
    if len(dims) != len(counts):
        raise ValueError("one feature width per dimension required")
    if arch == "scnn":
        value = 1
        for S, d in zip(counts, dims):
            value *= _factor(m, d) ** S
        return {"bound": value} if detail else value
    p = len(counts) - 1
    product = 1
    for n, S in enumerate(counts):
        width = dims[n] + (dims[n - 1] if n > 0 else 0) + (dims[n + 1] if n < p else 0)
        product *= _factor(m, width) ** S
    trivial = generic_count(m * sum(counts), sum(S * d for S, d in zip(counts, dims)))
    value = min(product, trivial)
    return {"product": product, "trivial": trivial, "bound": value} if detail else value


def rank_condition(stack: BoundaryStack, dims: Sequence[int], M: str = "shifted",
                   O: str = "coboundary", eps_rel: float = DEFAULT_EPS_REL) -> bool:
    """``rank((O_n)_C) >= rank((M_n)_C)`` for every row subset ``C`` and ``d_{n+1} >= d_n``, ``n < p``."""
    for n in range(stack.dim):
        if dims[n + 1] < dims[n]:
            return False
        Mn = _dense(operator(stack, M, n))
        On = _dense(operator(stack, O, n))
        S = Mn.shape[0]
        if S > 16:
            raise CapacityError(f"rank condition enumerates 2^{S} row subsets")
        for mask in range(1, 1 << S):
            C = [i for i in range(S) if mask >> i & 1]
            if rank_with_tolerance(On[C], eps_rel) < rank_with_tolerance(Mn[C], eps_rel):
                return False
    return True


def generic_weights(rng: np.random.Generator, dims: Sequence[int], m: int) -> list[np.ndarray]:
    """Weights uniform on (-1, 1), redrawn until every matrix has full rank."""
    out = []
    for d in dims:
        while True:
            W = rng.uniform(-1.0, 1.0, size=(d, m))
            if rank_with_tolerance(W) == min(d, m):
                break
        out.append(W)
    return out


@dataclass
class SliceResult:
    labels: np.ndarray  # resolution x resolution integer ids
    coords: np.ndarray  # resolution values along each direction
    count: int

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "region_label"])
            for i, a in enumerate(self.coords):
                for j, b in enumerate(self.coords):
                    w.writerow([f"{a:.6g}", f"{b:.6g}", int(self.labels[i, j])])

    @property
    def region(self) -> RegionCount:
        return RegionCount(self.count, "slice_lower_bound")


def slice_regions(A: Arrangement | np.ndarray, basepoint, u, v, resolution: int = 128,
                  extent: float = 1.0, eps_rel: float = DEFAULT_EPS_REL) -> SliceResult:
    """Sign patterns of ``W x`` on the grid ``x = x0 + a u + b v``, ``a, b`` in ``[-extent, extent]``.

    Exactly zero products count as positive.  The number of distinct
    patterns is a lower bound on the number of regions.
    """
    W = np.asarray(A.normals if isinstance(A, Arrangement) else A, dtype=np.float64)
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    x0, u, v = (np.asarray(z, dtype=np.float64).ravel() for z in (basepoint, u, v))
    if not (len(x0) == len(u) == len(v) == W.shape[1]):
        raise ValueError(f"plane vectors must live in R^{W.shape[1]}")
    if rank_with_tolerance(np.stack([u, v]), eps_rel) < 2:
        raise ValueError("slice directions are parallel or zero")
    coords = np.linspace(-extent, extent, resolution)
    a, b = np.meshgrid(coords, coords, indexing="ij")
    pts = x0 + a.reshape(-1, 1) * u + b.reshape(-1, 1) * v
    signs = (pts @ W.T) >= 0
    _, first, inverse = np.unique(signs, axis=0, return_index=True, return_inverse=True)
    # ids in order of first appearance on the grid
    order = np.argsort(np.argsort(first))
    labels = order[inverse.ravel()].reshape(resolution, resolution)
    return SliceResult(labels, coords, int(len(first)))


def populated_features_arrangement(stack: BoundaryStack, weights: Sequence[np.ndarray],
                                   population: np.ndarray, M: str = "shifted",
                                   O: str = "coboundary") -> Arrangement:
    """Vertex-output arrangement when edge inputs are a linear function of vertex inputs.

    ``population`` maps ``vec(H_0)`` to ``vec(H_1)``; the normals are
    ``[W_0^T kron M_0 | W_1^T kron O_0] [I; population]``.
    """
    W0, W1 = (np.atleast_2d(np.asarray(w, dtype=np.float64)) for w in weights[:2])
    if W0.shape[1] != W1.shape[1]:
        raise ValueError("W_0 and W_1 must share the output width")
    S0, S1 = stack.counts[0], stack.counts[1]
    C = np.asarray(population, dtype=np.float64)
    if C.shape != (S1 * W1.shape[0], S0 * W0.shape[0]):
        raise ValueError(f"population map must be {(S1 * W1.shape[0], S0 * W0.shape[0])}, got {C.shape}")
    left = kron(W0.T, _dense(operator(stack, M, 0)))
    right = kron(W1.T, _dense(operator(stack, O, 0)))
    normals = left + right @ C
    return Arrangement(normals, {"arch": "mpsn-populated", "counts": [S0, S1],
                                 "d": [W0.shape[0], W1.shape[0]], "m": W0.shape[1], "M": M, "O": O})
