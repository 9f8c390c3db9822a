from __future__ import annotations

import json

import numpy as np
import pytest
from scipy.spatial import Delaunay

from mpsn.complex import build_complex
from mpsn.flows import (DegenerateError, FlowDataset, GenerationError, PlanarComplex, bowyer_watson,
                        complex_from_points, corner_vertices, generate_complex, generate_dataset,
                        generate_trajectories, random_walk, randomize_test_orientations, walk_to_flow)
from mpsn.flows.benchmark import CHECKPOINTS, END, START
from mpsn.nn import BoundaryStack, FlowClassifier


@pytest.fixture(scope="module")
def pc():
    return generate_complex(300, seed=0)


@pytest.fixture(scope="module")
def small_ds():
    return generate_dataset(n_points=120, n_train=12, n_test=8, seed=5)


def test_square():
    sq = complex_from_points(np.array([[0.0, 0], [1, 0], [0, 1], [1, 1]]), holes=())
    assert sq.complex.dim_counts == (4, 5, 2)
    assert sq.euler_characteristic == 1


@pytest.mark.parametrize("seed", range(10))
def test_delaunay_matches_scipy(seed):
    pts = np.random.default_rng(seed).uniform(size=(60, 2))
    ours = bowyer_watson(pts)
    theirs = sorted(tuple(sorted(int(v) for v in t)) for t in Delaunay(pts).simplices)
    assert ours == theirs


def test_delaunay_degenerate():
    with pytest.raises(DegenerateError):
        bowyer_watson(np.array([[0.0, 0], [1, 1]]))


def test_no_holes_is_a_disc():
    assert generate_complex(100, holes=(), seed=1).euler_characteristic == 1


def test_two_holes(pc):
    assert pc.euler_characteristic == -1
    L1 = BoundaryStack.from_complex(pc.complex).laplacian(1).toarray()
    assert int((np.linalg.eigvalsh(L1) < 1e-8).sum()) == 2
    centres = [((h[0] + h[1]) / 2, (h[2] + h[3]) / 2) for h in pc.holes]
    for cx, cy in centres:
        inside = (np.abs(pc.points[:, 0] - cx) < 0.09) & (np.abs(pc.points[:, 1] - cy) < 0.09)
        assert not inside.any()


@pytest.mark.parametrize("holes", [((0.3, 0.2, 0.4, 0.6),), ((0.1, 0.5, 0.1, 0.5), (0.4, 0.6, 0.4, 0.6)),
                                   ((-0.1, 0.2, 0.4, 0.6),)])
def test_invalid_holes(holes):
    with pytest.raises(ValueError):
        generate_complex(100, holes=holes)


def test_too_few_points():
    with pytest.raises(ValueError):
        generate_complex(20)


def _path_complex():
    points = np.array([[0.05, 0.95], [0.05, 0.05], [0.95, 0.05]])
    K = build_complex([[], [(0, 1), (1, 2)]], max_dim=2)
    return PlanarComplex(points, K, ())


def test_greedy_walk_on_a_path():
    path = _path_complex()
    walk = random_walk(path, 0, 1.0, np.random.default_rng(0))
    assert walk == [0, 1, 2]
    assert walk_to_flow(path.complex, walk).tolist() == [1.0, 1.0]
    with pytest.raises(GenerationError):
        random_walk(path, 1, 1.0, np.random.default_rng(0))  # no top-right vertex


@pytest.mark.parametrize("label", [0, 1])
def test_walks_visit_corners(pc, label):
    corners = {name: set(corner_vertices(pc, name).tolist()) for name in (START, END, CHECKPOINTS[label])}
    B1 = BoundaryStack.from_complex(pc.complex).B(1)
    for s in generate_trajectories(pc, 10, label, seed=label):
        assert s.walk[0] in corners[START] and s.walk[-1] in corners[END]
        assert any(v in corners[CHECKPOINTS[label]] for v in s.walk)
        div = B1 @ s.flow
        assert np.flatnonzero(div).tolist() == sorted([s.walk[0], s.walk[-1]])
        assert div[s.walk[0]] == -1 and div[s.walk[-1]] == 1
        assert len(s.walk) <= 4 * len(pc.points)


def test_bad_label(pc):
    with pytest.raises(ValueError):
        generate_trajectories(pc, 1, 2)


def test_flips(small_ds):
    canonical = generate_dataset(n_points=120, n_train=12, n_test=8, seed=5, randomize=False)
    assert all((s.flip == 1).all() for s in canonical.train + canonical.test)
    for a, b in zip(canonical.test, small_ds.test):
        assert np.array_equal(b.flow * b.flip, a.flow)
        assert a.label == b.label
    assert any((s.flip == -1).any() for s in small_ds.test)
    assert all((s.flip == 1).all() for s in small_ds.train)
    again = randomize_test_orientations(canonical, small_ds.meta["flip_seed"])
    assert all(np.array_equal(a.flip, b.flip) for a, b in zip(again.test, small_ds.test))
    other = randomize_test_orientations(canonical, small_ds.meta["flip_seed"] + 1)
    assert any(not np.array_equal(a.flip, b.flip) for a, b in zip(other.test, small_ds.test))
    # flips compose: re-randomising a randomised set gives the same as randomising the canonical one
    twice = randomize_test_orientations(small_ds, 3)
    once = randomize_test_orientations(canonical, 3)
    assert all(np.array_equal(a.flow, b.flow) for a, b in zip(twice.test, once.test))


def test_flow_divergence_survives_flips(small_ds):
    canonical = generate_dataset(n_points=120, n_train=12, n_test=8, seed=5, randomize=False)
    B1 = small_ds.stack().B(1)
    for s, c in zip(small_ds.test, canonical.test):
        flipped_B1 = B1 @ np.diag(s.flip.astype(float))
        assert np.array_equal(flipped_B1 @ s.flow, B1 @ c.flow)
        assert np.count_nonzero(B1 @ c.flow) == 2


def test_invariant_model_ignores_orientation(small_ds):
    canonical = generate_dataset(n_points=120, n_train=12, n_test=8, seed=5, randomize=False)
    model = FlowClassifier(np.random.default_rng(0), "mpsn-tanh", hidden=8, layers=2)
    ops = model.operators(small_ds.stack())
    X0, T0, y0 = canonical.arrays("test")
    X1, T1, y1 = small_ds.arrays("test")
    a, b = model(ops, X0, T0).value, model(ops, X1, T1).value
    assert np.abs(a - b).max() < 1e-9
    assert np.array_equal(a.argmax(1), b.argmax(1)) and np.array_equal(y0, y1)


def test_arrays(small_ds):
    X, T, y = small_ds.arrays("train")
    E = small_ds.complex.complex.count(1)
    assert X.shape == (12, E, 1) and T.shape == (12, E) and y.tolist().count(0) == 6
    empty = FlowDataset(small_ds.complex, [], [], {})
    assert empty.arrays("test")[0].shape == (0, E, 1)


def test_generation_is_reproducible(tmp_path):
    kwargs = dict(n_points=100, n_train=6, n_test=4, seed=9)
    generate_dataset(**kwargs).save(tmp_path / "a.json")
    generate_dataset(**kwargs).save(tmp_path / "b.json")
    generate_dataset(**kwargs, workers=2).save(tmp_path / "c.json")
    a = (tmp_path / "a.json").read_bytes()
    assert a == (tmp_path / "b.json").read_bytes() == (tmp_path / "c.json").read_bytes()
    generate_dataset(**dict(kwargs, seed=10)).save(tmp_path / "d.json")
    assert a != (tmp_path / "d.json").read_bytes()


@pytest.mark.parametrize("separate", [False, True])
def test_json_roundtrip(tmp_path, small_ds, separate):
    small_ds.save(tmp_path / "ds.json", tmp_path / "complex.json" if separate else None)
    back = FlowDataset.load(tmp_path / "ds.json")
    assert back.complex.complex.dim_counts == small_ds.complex.complex.dim_counts
    assert np.array_equal(back.complex.points, small_ds.complex.points)
    for a, b in zip(back.train + back.test, small_ds.train + small_ds.test):
        assert np.array_equal(a.flow, b.flow) and np.array_equal(a.flip, b.flip) and a.label == b.label
    assert len(back.test) == len(small_ds.test)
    assert back.meta == small_ds.meta


def test_load_rejects_mismatch(tmp_path, small_ds):
    obj = small_ds.to_json()
    obj["train"][0]["flow"] = obj["train"][0]["flow"][:-1]
    (tmp_path / "bad.json").write_text(json.dumps(obj))
    with pytest.raises(ValueError):
        FlowDataset.load(tmp_path / "bad.json")
