"""Colour refinement on graphs (WL) and simplicial complexes (SWL).

Perfect hashing is done by canonical relabelling: at every round the
signature of each simplex (its own colour plus the sorted multisets coming
from the enabled adjacencies) is collected over *both* inputs, the distinct
signatures are sorted, and each receives the next consecutive integer.  The
resulting colours are therefore comparable across the two inputs and fully
reproducible.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .complex import SimplicialComplex
from .lifting import Graph

ADJACENCIES = ("boundary", "coboundary", "lower", "upper")
FULL = frozenset(ADJACENCIES)
SPARSE = frozenset({"boundary", "upper"})


def variant_from_name(name: str) -> frozenset[str]:
    if name == "full":
        return FULL
    if name == "sparse":
        return SPARSE
    parts = frozenset(p.strip() for p in name.split("+") if p.strip())
    if not parts or not parts <= FULL:
        raise ValueError(f"unknown SWL variant {name!r}")
    return parts


@dataclass
class Colouring:
    """Per-dimension colour arrays after ``iteration`` refinement rounds."""

    colours: list[np.ndarray]
    iteration: int = 0

    def histogram(self, dim: int) -> Counter:
        if dim >= len(self.colours):
            return Counter()
        return Counter(int(c) for c in self.colours[dim])

    def num_classes(self) -> int:
        return len({(k, int(c)) for k, cs in enumerate(self.colours) for c in cs})

    def partition(self) -> frozenset[frozenset[tuple[int, int]]]:
        """The induced partition of simplices, independent of colour names."""
        classes: dict[tuple[int, int], set] = {}
        for k, cs in enumerate(self.colours):
            for i, c in enumerate(cs):
                classes.setdefault((k, int(c)), set()).add((k, i))
        return frozenset(frozenset(v) for v in classes.values())


@dataclass
class Verdict:
    distinguished: bool
    witness_dimension: int | None = None
    witness_iteration: int | None = None
    histograms: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "distinguished": self.distinguished,
            "dim": self.witness_dimension,
            "iter": self.witness_iteration,
            "histograms": self.histograms,
        }


class _Neighbourhoods:
    """Index lists for the four adjacency kinds of one complex."""

    def __init__(self, K: SimplicialComplex):
        self.counts = K.dim_counts
        self.boundary = [[[f.index for f, _ in links] for links in table] for table in K.boundary_of]
        self.coboundary = [[[c.index for c, _ in links] for links in table] for table in K.coboundary_of]
        self.lower = []
        self.upper = []
        for k in range(len(self.counts)):
            low, up = [], []
            for i in range(self.counts[k]):
                low.append([(t, f) for f in self.boundary[k][i]
                            for t in self.coboundary[k - 1][f] if t != i] if k else [])
                up.append([(t, c) for c in self.coboundary[k][i]
                           for t in self.boundary[k + 1][c] if t != i])
            self.lower.append(low)
            self.upper.append(up)


def _signatures(nb: _Neighbourhoods, colours: list[np.ndarray], variant) -> list[list[tuple]]:
    out = []
    for k, n in enumerate(nb.counts):
        cur = colours[k]
        below = colours[k - 1] if k else None
        above = colours[k + 1] if k + 1 < len(colours) else None
        sigs = []
        for i in range(n):
            parts = [k, int(cur[i])]
            if "boundary" in variant:
                parts.append(tuple(sorted(int(below[f]) for f in nb.boundary[k][i])) if k else ())
            if "coboundary" in variant:
                parts.append(tuple(sorted(int(above[c]) for c in nb.coboundary[k][i])) if above is not None else ())
            if "lower" in variant:
                parts.append(tuple(sorted((int(cur[t]), int(below[f])) for t, f in nb.lower[k][i])) if k else ())
            if "upper" in variant:
                parts.append(tuple(sorted((int(cur[t]), int(above[c])) for t, c in nb.upper[k][i]))
                             if above is not None else ())
            sigs.append(tuple(parts))
        out.append(sigs)
    return out


def _relabel(all_sigs: list[list[list[tuple]]]) -> list[list[np.ndarray]]:
    distinct = sorted({s for sigs in all_sigs for table in sigs for s in table})
    code = {s: i for i, s in enumerate(distinct)}
    return [[np.array([code[s] for s in table], dtype=np.int64) for table in sigs] for sigs in all_sigs]


def _first_histogram_mismatch(a: list[np.ndarray], b: list[np.ndarray]) -> int | None:
    for k in range(max(len(a), len(b))):
        ha = Counter(a[k].tolist()) if k < len(a) else Counter()
        hb = Counter(b[k].tolist()) if k < len(b) else Counter()
        if ha != hb:
            return k
    return None


def _hist_json(colours: list[np.ndarray]) -> dict:
    return {str(k): {str(c): n for c, n in sorted(Counter(cs.tolist()).items())}
            for k, cs in enumerate(colours)}


def _initial(counts) -> list[np.ndarray]:
    return [np.full(n, k, dtype=np.int64) for k, n in enumerate(counts)]


def _refine(neighbourhoods: list[_Neighbourhoods], variant, max_iter: int, compare: bool):
    colours = [_initial(nb.counts) for nb in neighbourhoods]
    t = 0
    if compare:
        k = _first_histogram_mismatch(*colours)
        if k is not None:
            return colours, t, (k, t)
    classes = [len({(k, int(c)) for k, cs in enumerate(col) for c in cs}) for col in colours]
    while t < max_iter:
        sigs = [_signatures(nb, col, variant) for nb, col in zip(neighbourhoods, colours)]
        new = _relabel(sigs)
        new_classes = [len({(k, int(c)) for k, cs in enumerate(col) for c in cs}) for col in new]
        if compare:
            k = _first_histogram_mismatch(*new)
            if k is not None:
                return new, t + 1, (k, t + 1)
        if new_classes == classes:
            # stable: keep the round-t colours, renamed consistently
            return new, t, None
        colours, classes = new, new_classes
        t += 1
    return colours, t, None


def swl_refine(K1: SimplicialComplex, K2: SimplicialComplex, variant=FULL,
               max_iter: int | None = None) -> tuple[Colouring, Colouring, Verdict]:
    """Jointly refine two complexes and report whether their histograms ever differ."""
    if isinstance(variant, str):
        variant = variant_from_name(variant)
    if max_iter is None:
        max_iter = max(len(K1), len(K2)) + 1
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    nbs = [_Neighbourhoods(K1), _Neighbourhoods(K2)]
    colours, t, witness = _refine(nbs, variant, max_iter, compare=True)
    verdict = Verdict(
        distinguished=witness is not None,
        witness_dimension=witness[0] if witness else None,
        witness_iteration=witness[1] if witness else None,
        histograms={"a": _hist_json(colours[0]), "b": _hist_json(colours[1])},
    )
    return Colouring(colours[0], t), Colouring(colours[1], t), verdict


def stable_partition(K: SimplicialComplex, variant=FULL, max_iter: int | None = None) -> Colouring:
    """Fixed-point colouring of a single complex; ``iteration`` is the round it stabilised."""
    if isinstance(variant, str):
        variant = variant_from_name(variant)
    if max_iter is None:
        max_iter = len(K) + 1
    colours, t, _ = _refine([_Neighbourhoods(K)], variant, max_iter, compare=False)
    return Colouring(colours[0], t)


def wl_refine(g1: Graph, g2: Graph, max_iter: int | None = None) -> tuple[Colouring, Colouring, Verdict]:
    """Classical 1-WL on two graphs with a shared colour dictionary."""
    if max_iter is None:
        max_iter = max(g1.n, g2.n) + 1
    adj = [g1.neighbours(), g2.neighbours()]

    def init(g):
        if g.labels is not None:
            return np.asarray(g.labels, dtype=np.int64)
        return np.zeros(g.n, dtype=np.int64)

    colours = [init(g1), init(g2)]
    if g1.labels is not None or g2.labels is not None:
        colours = [c[0] for c in _relabel([[list((int(x),) for x in c)] for c in colours])]

    def verdict(t, cols, witness):
        return Verdict(witness, 0 if witness else None, t if witness else None,
                       {"a": _hist_json([cols[0]]), "b": _hist_json([cols[1]])})

    if Counter(colours[0].tolist()) != Counter(colours[1].tolist()):
        return Colouring([colours[0]], 0), Colouring([colours[1]], 0), verdict(0, colours, True)
    t = 0
    classes = [len(set(c.tolist())) for c in colours]
    while t < max_iter:
        sigs = [[[(int(col[v]), tuple(sorted(int(col[u]) for u in nb[v]))) for v in range(len(col))]]
                for col, nb in zip(colours, adj)]
        new = [c[0] for c in _relabel(sigs)]
        if Counter(new[0].tolist()) != Counter(new[1].tolist()):
            return Colouring([new[0]], t + 1), Colouring([new[1]], t + 1), verdict(t + 1, new, True)
        new_classes = [len(set(c.tolist())) for c in new]
        if new_classes == classes:
            return Colouring([new[0]], t), Colouring([new[1]], t), verdict(t, new, False)
        colours, classes = new, new_classes
        t += 1
    return Colouring([colours[0]], t), Colouring([colours[1]], t), verdict(t, colours, False)
