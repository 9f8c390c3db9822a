"""Graphs and their clique-complex lifts."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .complex import SimplicialComplex, build_complex


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Edges are stored as ``(u, v)`` with ``u < v``.
    """

    n: int
    edges: frozenset[tuple[int, int]]
    labels: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < v < self.n):
                raise ValueError(f"edge {(u, v)} not canonical for n={self.n}")
        if self.labels is not None and len(self.labels) != self.n:
            raise ValueError("one label per vertex required")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels=None) -> "Graph":
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at {u}")
            canon.add((min(u, v), max(u, v)))
        return cls(n, frozenset(canon), tuple(labels) if labels is not None else None)

    def neighbours(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def degrees(self) -> list[int]:
        return [len(a) for a in self.neighbours()]

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def relabel(self, perm: list[int]) -> "Graph":
        """Image of the graph under the vertex map ``v -> perm[v]``."""
        labels = None
        if self.labels is not None:
            labels = [0] * self.n
            for v, lab in enumerate(self.labels):
                labels[perm[v]] = lab
        return Graph.from_edges(self.n, ((perm[u], perm[v]) for u, v in self.edges), labels)

    def to_json(self) -> dict:
        out = {"n": self.n, "edges": [list(e) for e in sorted(self.edges)]}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Graph":
        return cls.from_edges(int(obj["n"]), obj["edges"], obj.get("labels"))


def enumerate_cliques(g: Graph, max_size: int) -> list[list[tuple[int, ...]]]:
    """All cliques of size ``1..max_size`` grouped by size (index = size - 1).

    Each clique is grown only by vertices larger than its current maximum, so
    it is produced exactly once; candidate sets are intersected neighbour sets,
    which keeps the work proportional to the number of cliques found.
    """
    adj = g.neighbours()
    higher = [frozenset(w for w in adj[v] if w > v) for v in range(g.n)]
    levels: list[list[tuple[tuple[int, ...], frozenset[int]]]] = [
        [((v,), higher[v]) for v in range(g.n)]
    ]
    while len(levels) < max_size and levels[-1]:
        nxt = []
        for clique, cand in levels[-1]:
            for w in sorted(cand):
                nxt.append((clique + (w,), cand & higher[w]))
        levels.append(nxt)
    return [[c for c, _ in level] for level in levels if level]


def count_cliques(g: Graph, k: int) -> int:
    """Number of k-cliques (k vertices, pairwise adjacent)."""
    if k < 1:
        raise ValueError("clique size must be at least 1")
    levels = enumerate_cliques(g, k)
    return len(levels[k - 1]) if len(levels) >= k else 0


def clique_number(g: Graph) -> int:
    return len(enumerate_cliques(g, g.n)) if g.n else 0


def clique_lift(g: Graph, max_dim: int = 2) -> SimplicialComplex:
    """Clique complex truncated at dimension ``max_dim``: each (k+1)-clique is a k-simplex."""
    if max_dim < 1:
        raise ValueError("max_dim must be at least 1")
    levels = enumerate_cliques(g, max_dim + 1)
    return build_complex(levels, max_dim=max(max_dim, 1))
