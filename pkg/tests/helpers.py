from __future__ import annotations

import itertools

import numpy as np

from mpsn.complex import build_complex
from mpsn.lifting import Graph
from mpsn.numerics import backward


def random_complex(rng: np.random.Generator, max_simplices: int = 30, n_vertices: int = 7, max_dim: int = 3):
    """Closure of random simplices, grown until adding another would exceed ``max_simplices``."""
    chosen: set[tuple[int, ...]] = set()
    for _ in range(50):
        k = int(rng.integers(0, max_dim + 1))
        s = tuple(sorted(rng.choice(n_vertices, size=k + 1, replace=False).tolist()))
        closure = {f for r in range(1, len(s) + 1) for f in itertools.combinations(s, r)}
        if len(chosen | closure) > max_simplices:
            continue
        chosen |= closure
    if not chosen:
        chosen = {(0,)}
    return build_complex([sorted(chosen, key=lambda t: (len(t), t))], max_dim=max_dim, by_length=True)


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph.from_edges(n, edges)


def finite_difference_check(loss_fn, params, h: float = 1e-5) -> float:
    """Largest relative error between ``backward`` gradients and central differences."""
    for p in params:
        p.grad = None
    backward(loss_fn())
    worst = 0.0
    for p in params:
        analytic = np.zeros_like(p.value) if p.grad is None else p.grad.copy()
        numeric = np.zeros_like(p.value)
        it = np.nditer(p.value, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = p.value[i]
            p.value[i] = old + h
            up = float(loss_fn().value)
            p.value[i] = old - h
            down = float(loss_fn().value)
            p.value[i] = old
            numeric[i] = (up - down) / (2 * h)
        scale = max(np.abs(numeric).max(), np.abs(analytic).max(), 1e-8)
        worst = max(worst, float(np.abs(numeric - analytic).max() / scale))
    return worst
