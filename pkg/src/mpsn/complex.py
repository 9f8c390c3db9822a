"""Oriented simplicial complexes, signed boundary matrices and Hodge Laplacians.

Every simplex is stored as a strictly ascending vertex tuple and treated as
positively oriented.  Faces are signed by the usual alternating rule: the face
obtained by deleting the vertex at position ``i`` carries sign ``(-1)**i``.
For an edge ``(u, v)`` with ``u < v`` this gives ``v`` sign +1 and ``u`` sign -1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

DEFAULT_MAX_DIM = 3


class ComplexError(ValueError):
    """Raised for malformed simplicial complex input."""


class SimplexId(NamedTuple):
    dim: int
    index: int


class Adjacent(NamedTuple):
    simplex: SimplexId
    shared: SimplexId | None
    orientation: int


def face_signs(simplex: tuple[int, ...]) -> list[tuple[tuple[int, ...], int]]:
    """Codimension-1 faces of an ascending vertex tuple with their signs."""
    if len(simplex) < 2:
        return []
    out = []
    for i in range(len(simplex)):
        face = simplex[:i] + simplex[i + 1:]
        out.append((face, 1 if i % 2 == 0 else -1))
    return out


@dataclass(frozen=True)
class SignedIncidenceMatrix:
    """Sparse signed boundary matrix ``B_k`` of shape ``S_{k-1} x S_k``."""

    rows: int
    cols: int
    entries: tuple[tuple[int, int, int], ...]

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.int64)
        for r, c, s in self.entries:
            out[r, c] = s
        return out

    def to_sparse(self, dtype=np.int64) -> sp.csr_matrix:
        if not self.entries:
            return sp.csr_matrix((self.rows, self.cols), dtype=dtype)
        r, c, s = zip(*self.entries)
        return sp.csr_matrix((np.asarray(s, dtype=dtype), (r, c)), shape=(self.rows, self.cols))

    def unsigned(self) -> "SignedIncidenceMatrix":
        return SignedIncidenceMatrix(self.rows, self.cols, tuple((r, c, 1) for r, c, _ in self.entries))


@dataclass
class SimplicialComplex:
    """Closed, canonically oriented simplicial complex.

    ``simplices[k]`` lists the k-simplices as ascending vertex tuples; the
    position of a tuple in that list is its index.  Instances are treated as
    immutable once built.
    """

    simplices: list[list[tuple[int, ...]]]
    boundary_of: list[list[list[tuple[SimplexId, int]]]] = field(repr=False)
    coboundary_of: list[list[list[tuple[SimplexId, int]]]] = field(repr=False)
    _lookup: list[dict[tuple[int, ...], int]] = field(repr=False)

    @property
    def dim(self) -> int:
        """Top dimension ``p``; -1 for the empty complex."""
        return len(self.simplices) - 1

    @property
    def dim_counts(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.simplices)

    @property
    def is_empty(self) -> bool:
        return not self.simplices

    def count(self, k: int) -> int:
        return len(self.simplices[k]) if 0 <= k <= self.dim else 0

    def index(self, simplex: Iterable[int]) -> SimplexId:
        key = tuple(sorted(simplex))
        k = len(key) - 1
        if k > self.dim or key not in self._lookup[k]:
            raise KeyError(f"simplex {key} not in complex")
        return SimplexId(k, self._lookup[k][key])

    def __contains__(self, simplex) -> bool:
        key = tuple(sorted(simplex))
        k = len(key) - 1
        return 0 <= k <= self.dim and key in self._lookup[k]

    def vertices_of(self, s: SimplexId) -> tuple[int, ...]:
        return self.simplices[s.dim][s.index]

    def all_ids(self) -> Iterable[SimplexId]:
        for k, table in enumerate(self.simplices):
            for i in range(len(table)):
                yield SimplexId(k, i)

    def __len__(self) -> int:
        return sum(self.dim_counts)

    def __repr__(self) -> str:
        return f"SimplicialComplex(dim={self.dim}, counts={self.dim_counts})"

    # -- serialization -------------------------------------------------

    def to_json(self) -> dict:
        return {"dims": self.dim, "simplices": [[list(s) for s in table] for table in self.simplices]}

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def from_json(cls, obj: dict, max_dim: int | None = None) -> "SimplicialComplex":
        if "simplices" not in obj:
            raise ComplexError("complex JSON needs a 'simplices' field")
        tables = obj["simplices"]
        if max_dim is None:
            max_dim = max(DEFAULT_MAX_DIM, int(obj.get("dims", -1)))
        flat = [tuple(int(v) for v in s) for table in tables for s in table]
        return build_complex([flat], max_dim=max_dim, by_length=True)

    @classmethod
    def load(cls, path: str | Path, max_dim: int | None = None) -> "SimplicialComplex":
        return cls.from_json(json.loads(Path(path).read_text()), max_dim=max_dim)


def build_complex(simplex_lists: Sequence[Sequence[Sequence[int]]], max_dim: int = DEFAULT_MAX_DIM,
                  by_length: bool = False) -> SimplicialComplex:
    """Close the given simplices under taking faces and link the boundaries.

    ``simplex_lists[k]`` holds k-simplices.  With ``by_length=True`` the outer
    grouping is ignored and each tuple is placed by its length instead.
    """
    seen: set[tuple[int, ...]] = set()
    given: list[tuple[int, ...]] = []
    for k, table in enumerate(simplex_lists):
        for raw in table:
            verts = tuple(int(v) for v in raw)
            if not verts:
                raise ComplexError("empty simplex")
            if any(v < 0 for v in verts):
                raise ComplexError(f"negative vertex id in {verts}")
            key = tuple(sorted(verts))
            if len(set(key)) != len(key):
                raise ComplexError(f"repeated vertex in {verts}")
            if not by_length and len(key) != k + 1:
                raise ComplexError(f"{verts} listed among {k}-simplices")
            if key in seen:
                raise ComplexError(f"duplicate simplex {key}")
            if len(key) - 1 > max_dim:
                raise ComplexError(f"simplex {key} exceeds max_dim={max_dim}")
            seen.add(key)
            given.append(key)

    closure: set[tuple[int, ...]] = set()
    for s in sorted(given, key=len, reverse=True):
        if s in closure:
            continue
        for r in range(1, len(s) + 1):
            closure.update(combinations(s, r))

    top = max((len(s) for s in closure), default=0) - 1
    simplices: list[list[tuple[int, ...]]] = [[] for _ in range(top + 1)]
    for s in sorted(closure, key=lambda t: (len(t), t)):
        simplices[len(s) - 1].append(s)
    return _link(simplices)


def _link(simplices: list[list[tuple[int, ...]]]) -> SimplicialComplex:
    lookup = [{s: i for i, s in enumerate(table)} for table in simplices]
    boundary_of = [[[] for _ in table] for table in simplices]
    coboundary_of = [[[] for _ in table] for table in simplices]
    for k in range(1, len(simplices)):
        for j, s in enumerate(simplices[k]):
            for face, sign in face_signs(s):
                i = lookup[k - 1][face]
                boundary_of[k][j].append((SimplexId(k - 1, i), sign))
                coboundary_of[k - 1][i].append((SimplexId(k, j), sign))
    return SimplicialComplex(simplices, boundary_of, coboundary_of, lookup)


def complex_from_simplices(simplices: Iterable[Sequence[int]], max_dim: int = DEFAULT_MAX_DIM) -> SimplicialComplex:
    """Build from an unstructured collection of simplices (faces optional)."""
    uniq = sorted({tuple(sorted(int(v) for v in s)) for s in simplices}, key=lambda t: (len(t), t))
    return build_complex([uniq], max_dim=max_dim, by_length=True)


def boundary_matrix(K: SimplicialComplex, k: int) -> SignedIncidenceMatrix:
    """Signed boundary matrix ``B_k``; ``k = p + 1`` yields an empty-column matrix."""
    if not 1 <= k <= K.dim + 1:
        raise IndexError(f"boundary dimension {k} out of range 1..{K.dim + 1}")
    cols = K.count(k)
    entries = []
    if k <= K.dim:
        for j, links in enumerate(K.boundary_of[k]):
            for face, sign in links:
                entries.append((face.index, j, sign))
    entries.sort()
    return SignedIncidenceMatrix(K.count(k - 1), cols, tuple(entries))


def _boundary_dense(K: SimplicialComplex, k: int) -> np.ndarray:
    if k < 1 or k > K.dim:
        return np.zeros((K.count(k - 1), K.count(k)), dtype=np.int64)
    return boundary_matrix(K, k).to_dense()


def hodge_laplacian(K: SimplicialComplex, k: int, variant: str = "full") -> np.ndarray:
    """Integer Hodge Laplacian ``L_k`` or its ``down``/``up`` part."""
    if not 0 <= k <= K.dim:
        raise IndexError(f"Laplacian dimension {k} out of range 0..{K.dim}")
    n = K.count(k)
    down = np.zeros((n, n), dtype=np.int64)
    up = np.zeros((n, n), dtype=np.int64)
    if k >= 1:
        b = _boundary_dense(K, k)
        down = b.T @ b
    if k + 1 <= K.dim:
        b = _boundary_dense(K, k + 1)
        up = b @ b.T
    if variant == "down":
        return down
    if variant == "up":
        return up
    if variant == "full":
        return down + up
    raise ValueError(f"unknown Laplacian variant {variant!r}")


def adjacency(K: SimplicialComplex, s: SimplexId, kind: str) -> list[Adjacent]:
    """Neighbours of ``s`` with the shared simplex and relative orientation.

    The relative orientation of a lower (upper) neighbour is the corresponding
    off-diagonal entry of ``B_k^T B_k`` (``B_{k+1} B_{k+1}^T``).
    """
    k, i = s
    if kind == "boundary":
        return [Adjacent(f, None, sign) for f, sign in K.boundary_of[k][i]]
    if kind == "coboundary":
        return [Adjacent(c, None, sign) for c, sign in K.coboundary_of[k][i]]
    out = []
    if kind == "lower":
        for face, s1 in K.boundary_of[k][i]:
            for other, s2 in K.coboundary_of[face.dim][face.index]:
                if other.index != i:
                    out.append(Adjacent(other, face, s1 * s2))
    elif kind == "upper":
        for cof, s1 in K.coboundary_of[k][i]:
            for other, s2 in K.boundary_of[cof.dim][cof.index]:
                if other.index != i:
                    out.append(Adjacent(other, cof, s1 * s2))
    else:
        raise ValueError(f"unknown adjacency kind {kind!r}")
    out.sort(key=lambda a: a.simplex.index)
    return out
