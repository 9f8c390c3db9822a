"""Synthetic trajectory-classification benchmark on a planar complex with two holes."""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import seeding
from ..complex import SimplicialComplex, build_complex
from ..nn.structure import BoundaryStack
from .delaunay import DegenerateError, bowyer_watson

Rect = tuple[float, float, float, float]  # x0, x1, y0, y1
DEFAULT_HOLES: tuple[Rect, ...] = ((0.2, 0.4, 0.4, 0.6), (0.6, 0.8, 0.4, 0.6))
CORNER = 0.2
START, END = "top-left", "bottom-right"
CHECKPOINTS = {0: "bottom-left", 1: "top-right"}
MAX_RETRIES = 5


class GenerationError(RuntimeError):
    pass


@dataclass
class PlanarComplex:
    points: np.ndarray
    complex: SimplicialComplex
    holes: tuple[Rect, ...]

    @property
    def euler_characteristic(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.complex.dim_counts))

    def to_json(self) -> dict:
        return {"points": self.points.tolist(), "holes": [list(h) for h in self.holes],
                "complex": self.complex.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "PlanarComplex":
        return cls(np.asarray(obj["points"], dtype=np.float64),
                   SimplicialComplex.from_json(obj["complex"]),
                   tuple(tuple(h) for h in obj["holes"]))

    def neighbours(self) -> list[list[int]]:
        nb = [[] for _ in range(len(self.points))]
        for u, v in self.complex.simplices[1]:
            nb[u].append(v)
            nb[v].append(u)
        return nb


def _triangle_hits_rect(tri: np.ndarray, rect: Rect) -> bool:
    """Separating-axis test between a triangle and a closed axis-aligned rectangle."""
    x0, x1, y0, y1 = rect
    if tri[:, 0].max() < x0 or tri[:, 0].min() > x1 or tri[:, 1].max() < y0 or tri[:, 1].min() > y1:
        return False
    corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    for i in range(3):
        a, b, c = tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]
        normal = np.array([b[1] - a[1], a[0] - b[0]])
        side = np.sign((c - a) @ normal)
        if np.all(side * ((corners - a) @ normal) < 0):
            return False
    return True


def _validate_holes(holes) -> None:
    for h in holes:
        x0, x1, y0, y1 = h
        if not (0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1):
            raise ValueError(f"hole {h} is not a rectangle inside the unit square")
    for i, a in enumerate(holes):
        for b in holes[i + 1:]:
            if a[0] <= b[1] and b[0] <= a[1] and a[2] <= b[3] and b[2] <= a[3]:
                raise ValueError(f"holes {a} and {b} overlap")


def complex_from_points(points: np.ndarray, holes=DEFAULT_HOLES) -> PlanarComplex:
    """Delaunay-triangulate, drop triangles meeting a hole, keep the closure of the rest."""
    holes = tuple(tuple(float(c) for c in h) for h in holes)
    _validate_holes(holes)
    tris = bowyer_watson(points)
    kept = [t for t in tris if not any(_triangle_hits_rect(points[list(t)], h) for h in holes)]
    if not kept:
        raise GenerationError("every triangle intersects a hole")
    used = sorted({v for t in kept for v in t})
    new = {v: i for i, v in enumerate(used)}
    K = build_complex([[], [], [tuple(sorted(new[v] for v in t)) for t in kept]], max_dim=2)
    return PlanarComplex(np.asarray(points, dtype=np.float64)[used], K, holes)


def generate_complex(n_points: int = 300, holes=DEFAULT_HOLES, seed: int = 0) -> PlanarComplex:
    if n_points < 50:
        raise ValueError("n_points must be at least 50")
    rng = np.random.default_rng(seeding.derive(seed, "points"))
    pts = rng.uniform(size=(n_points, 2))
    for _ in range(MAX_RETRIES + 1):
        try:
            return complex_from_points(pts, holes)
        except DegenerateError:
            pts = pts + rng.normal(scale=1e-9, size=pts.shape)
    raise GenerationError(f"point set still degenerate after {MAX_RETRIES} perturbations")


def corner_vertices(pc: PlanarComplex, corner: str) -> np.ndarray:
    x, y = pc.points[:, 0], pc.points[:, 1]
    vertical, horizontal = corner.split("-")
    mx = x < CORNER if horizontal == "left" else x > 1 - CORNER
    my = y > 1 - CORNER if vertical == "top" else y < CORNER
    return np.flatnonzero(mx & my)


@dataclass
class FlowSample:
    flow: np.ndarray
    label: int
    flip: np.ndarray
    walk: list[int] = field(default_factory=list, compare=False)

    def to_json(self) -> dict:
        return {"flow": [int(v) if float(v).is_integer() else float(v) for v in self.flow],
                "label": int(self.label), "flip": [int(s) for s in self.flip]}

    @classmethod
    def from_json(cls, obj: dict) -> "FlowSample":
        return cls(np.asarray(obj["flow"], dtype=np.float64), int(obj["label"]),
                   np.asarray(obj["flip"], dtype=np.int64))


def walk_to_flow(K: SimplicialComplex, walk) -> np.ndarray:
    flow = np.zeros(K.count(1))
    for u, v in zip(walk[:-1], walk[1:]):
        flow[K.index((u, v)).index] += 1.0 if u < v else -1.0
    return flow


def _greedy_leg(points, nb, start, target, greedy_prob, rng, cap):
    walk = [start]
    v = start
    while v != target:
        if len(walk) > cap:
            return None
        if rng.random() < greedy_prob:
            d = np.linalg.norm(points[nb[v]] - points[target], axis=1)
            v = nb[v][int(np.argmin(d))]
        else:
            v = nb[v][rng.integers(len(nb[v]))]
        walk.append(v)
    return walk


def _reachable(nb, a, b) -> bool:
    seen, stack = {a}, [a]
    while stack:
        u = stack.pop()
        if u == b:
            return True
        for w in nb[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def random_walk(pc: PlanarComplex, label: int, greedy_prob: float, rng: np.random.Generator,
                max_attempts: int = 100) -> list[int]:
    """start corner -> checkpoint corner -> end corner; resampled when longer than 4 x |V|."""
    nb = pc.neighbours()
    regions = [corner_vertices(pc, c) for c in (START, CHECKPOINTS[label], END)]
    for name, r in zip((START, CHECKPOINTS[label], END), regions):
        if len(r) == 0:
            raise GenerationError(f"no vertices in the {name} corner")
    cap = 4 * len(pc.points)
    for _ in range(max_attempts):
        a, c, b = (int(rng.choice(r)) for r in regions)
        if not (_reachable(nb, a, c) and _reachable(nb, c, b)):
            raise GenerationError(f"vertex {b} is unreachable from {a} via {c}")
        first = _greedy_leg(pc.points, nb, a, c, greedy_prob, rng, cap)
        if first is None:
            continue
        second = _greedy_leg(pc.points, nb, c, b, greedy_prob, rng, cap - len(first) + 1)
        if second is None:
            continue
        return first + second[1:]
    raise GenerationError(f"no walk within {cap} steps after {max_attempts} attempts")


def _sample(args) -> FlowSample:
    pc, label, greedy_prob, seed = args
    walk = random_walk(pc, label, greedy_prob, np.random.default_rng(seed))
    return FlowSample(walk_to_flow(pc.complex, walk), label, np.ones(pc.complex.count(1), dtype=np.int64), walk)


def generate_trajectories(pc: PlanarComplex, n: int, class_label: int, greedy_prob: float = 0.9,
                          seed: int = 0, workers: int | None = None) -> list[FlowSample]:
    if class_label not in CHECKPOINTS:
        raise ValueError("class_label must be 0 or 1")
    jobs = [(pc, class_label, greedy_prob, seeding.derive(seed, "walk", class_label, i)) for i in range(n)]
    workers = seeding.worker_count() if workers is None else workers
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_sample, jobs, chunksize=max(1, n // (4 * workers))))
    return [_sample(j) for j in jobs]


@dataclass
class FlowDataset:
    complex: PlanarComplex
    train: list[FlowSample]
    test: list[FlowSample]
    meta: dict = field(default_factory=dict)

    def stack(self) -> BoundaryStack:
        return BoundaryStack.from_complex(self.complex.complex)

    def arrays(self, split: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Features ``B x E x 1``, orientation signs ``B x E`` and labels."""
        samples = getattr(self, split)
        E = self.complex.complex.count(1)
        if not samples:
            return np.zeros((0, E, 1)), np.zeros((0, E)), np.zeros(0, dtype=np.int64)
        X = np.stack([s.flow for s in samples])[..., None]
        T = np.stack([s.flip for s in samples]).astype(np.float64)
        y = np.array([s.label for s in samples], dtype=np.int64)
        return X, T, y

    def to_json(self, complex_ref: str | None = None) -> dict:
        out = {"meta": self.meta}
        if complex_ref is None:
            out["complex"] = self.complex.to_json()
        else:
            out["complex_file"] = complex_ref
        out["train"] = [s.to_json() for s in self.train]
        out["test"] = [s.to_json() for s in self.test]
        return out

    def save(self, path, complex_path=None) -> None:
        """Write the dataset; with ``complex_path`` the complex goes to its own file and is referenced."""
        path = Path(path)
        ref = None
        if complex_path is not None:
            complex_path = Path(complex_path)
            complex_path.write_text(json.dumps(self.complex.to_json()))
            ref = str(complex_path.relative_to(path.parent)) if complex_path.parent == path.parent \
                else str(complex_path)
        path.write_text(json.dumps(self.to_json(ref)))

    @classmethod
    def load(cls, path) -> "FlowDataset":
        path = Path(path)
        obj = json.loads(path.read_text())
        if "complex_file" in obj:
            ref = Path(obj["complex_file"])
            cobj = json.loads((ref if ref.is_absolute() else path.parent / ref).read_text())
        elif "complex" in obj:
            cobj = obj["complex"]
        else:
            raise ValueError(f"{path}: dataset has neither 'complex' nor 'complex_file'")
        pc = PlanarComplex.from_json(cobj)
        E = pc.complex.count(1)
        ds = cls(pc, [FlowSample.from_json(s) for s in obj["train"]],
                 [FlowSample.from_json(s) for s in obj["test"]], obj.get("meta", {}))
        for s in ds.train + ds.test:
            if len(s.flow) != E or len(s.flip) != E:
                raise ValueError(f"{path}: sample length does not match the {E} edges of the complex")
        return ds


def randomize_test_orientations(ds: FlowDataset, seed: int) -> FlowDataset:
    """Give each test sample an independent random edge orientation ``T_1``.

    The flow is expressed in the new orientation; vertex and triangle
    orientations are unchanged, so the sample sees ``B_1 T_1`` and ``T_1 B_2``.
    """
    E = ds.complex.complex.count(1)
    test = []
    for i, s in enumerate(ds.test):
        flip = np.random.default_rng(seeding.derive(seed, "flip", i)).choice([-1, 1], size=E)
        canonical = s.flow * s.flip
        test.append(FlowSample(canonical * flip, s.label, flip.astype(np.int64), s.walk))
    return FlowDataset(ds.complex, ds.train, test, dict(ds.meta, flip_seed=seed))


def generate_dataset(n_points: int = 300, n_train: int = 200, n_test: int = 50, seed: int = 0,
                     greedy_prob: float = 0.9, holes=DEFAULT_HOLES, randomize: bool = True,
                     workers: int | None = None) -> FlowDataset:
    pc = generate_complex(n_points, holes, seeding.derive(seed, "complex"))
    train, test = [], []
    for label in (0, 1):
        train += generate_trajectories(pc, n_train // 2 + (label < n_train % 2), label, greedy_prob,
                                       seeding.derive(seed, "train"), workers)
        test += generate_trajectories(pc, n_test // 2 + (label < n_test % 2), label, greedy_prob,
                                      seeding.derive(seed, "test"), workers)
    meta = {"seed": seed, "n_points": n_points, "n_train": n_train, "n_test": n_test,
            "greedy_prob": greedy_prob, "holes": [list(h) for h in pc.holes]}
    ds = FlowDataset(pc, train, test, meta)
    return randomize_test_orientations(ds, seeding.derive(seed, "orient")) if randomize else ds
