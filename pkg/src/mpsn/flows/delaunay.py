"""Bowyer-Watson Delaunay triangulation of planar point sets."""
from __future__ import annotations

import numpy as np


class DegenerateError(ValueError):
    pass


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _circumcircle(p, q, r):
    ax, ay = p
    bx, by = q
    cx, cy = r
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return None
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    return ux, uy, (ax - ux) ** 2 + (ay - uy) ** 2


def bowyer_watson(points) -> list[tuple[int, int, int]]:
    """Triangles as sorted index triples, sorted lexicographically."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    if n < 3:
        raise DegenerateError("need at least three points")
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = max(hi - lo) or 1.0
    mid = (lo + hi) / 2
    big = 1e3 * span
    super_pts = np.array([[mid[0] - big, mid[1] - big], [mid[0] + big, mid[1] - big], [mid[0], mid[1] + big]])
    allp = np.vstack([pts, super_pts])
    tris: dict[tuple[int, int, int], tuple[float, float, float]] = {}

    def add(a, b, c):
        cc = _circumcircle(allp[a], allp[b], allp[c])
        if cc is not None:
            tris[(a, b, c)] = cc

    add(n, n + 1, n + 2)
    for i in range(n):
        x, y = allp[i]
        bad = [t for t, (ux, uy, r2) in tris.items() if (x - ux) ** 2 + (y - uy) ** 2 < r2 * (1 + 1e-12)]
        edges: dict[tuple[int, int], int] = {}
        for t in bad:
            for e in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])):
                e = tuple(sorted(e))
                edges[e] = edges.get(e, 0) + 1
            del tris[t]
        for (a, b), c in edges.items():
            if c == 1 and _orient(allp[a], allp[b], allp[i]) != 0.0:
                add(a, b, i)
    out = sorted(tuple(sorted(t)) for t in tris if max(t) < n)
    if not out:
        raise DegenerateError("point set is collinear")
    return out
