from __future__ import annotations

import itertools
import time

import numpy as np
import pytest
from scipy.optimize import linprog

from mpsn.complex import complex_from_simplices
from mpsn.nn import BoundaryStack
from mpsn.regions import (CapacityError, build_arrangement, closed_form_bound, generic_count, generic_weights,
                          populated_features_arrangement, rank_condition, slice_regions, whitney_count)


def lp_region_count(W: np.ndarray) -> int:
    """Count nonempty open cones ``{x : s_i w_i x > 0}`` by LP feasibility."""
    W = W[np.abs(W).max(axis=1) > 0]
    total = 0
    for s in itertools.product([-1.0, 1.0], repeat=len(W)):
        A = -(np.array(s)[:, None] * W)
        res = linprog(np.zeros(W.shape[1]), A_ub=A, b_ub=-np.ones(len(W)), bounds=[(None, None)] * W.shape[1],
                      method="highs")
        total += res.status == 0
    return total


def triangle():
    return BoundaryStack.from_complex(complex_from_simplices([(0, 1, 2)]))


@pytest.mark.parametrize("W, expected", [
    (np.array([[1.0, 0, 0], [0, 1, 0], [0, 0, 1]]), 8),
    (np.array([[1.0, 0], [2.0, 0], [0, 1]]), 4),
    (np.array([[1.0, 0], [0, 1], [1, 1]]), 6),
    (np.array([[1.0, 1.0], [-3.0, -3.0]]), 2),
    (np.zeros((2, 4)), 1),
])
def test_small_arrangements(W, expected):
    assert whitney_count(W).count == expected
    assert lp_region_count(W) == expected


@pytest.mark.parametrize("seed", range(12))
def test_against_lp_oracle(seed):
    rng = np.random.default_rng(seed)
    M, N = int(rng.integers(2, 9)), int(rng.integers(1, 5))
    W = rng.integers(-2, 3, size=(M, N)).astype(float)  # integer rows produce degeneracies
    assert whitney_count(W).count == lp_region_count(W)


@pytest.mark.parametrize("M, N", [(3, 2), (5, 3), (8, 4), (10, 10), (12, 5), (4, 6)])
def test_generic_rows(M, N):
    W = np.random.default_rng(M * 31 + N).normal(size=(M, N))
    assert whitney_count(W).count == generic_count(M, N)


@pytest.mark.parametrize("seed", range(5))
def test_invariances(seed):
    rng = np.random.default_rng(seed)
    W = rng.integers(-1, 2, size=(9, 4)).astype(float)
    base = whitney_count(W).count
    assert whitney_count(W[rng.permutation(9)]).count == base
    assert whitney_count(W * rng.uniform(0.1, 10, size=(9, 1))).count == base
    assert whitney_count(W * rng.choice([-1.0, 1.0], size=(9, 1))).count == base


def test_capacity_limit():
    with pytest.raises(CapacityError):
        whitney_count(np.random.default_rng(0).normal(size=(23, 3)))
    with pytest.raises(ValueError):
        whitney_count(np.ones(3))


def test_triangle_counts():
    st = triangle()
    for seed in range(3):
        Ws = generic_weights(np.random.default_rng(seed), [1, 1, 1], 3)
        gnn = whitney_count(build_arrangement(st, "gnn", Ws)).count
        scnn = whitney_count(build_arrangement(st, "scnn", Ws)).count
        A = build_arrangement(st, "mpsn", Ws)
        assert A.shape == (21, 7)
        mpsn = whitney_count(A).count
        assert (gnn, scnn) == (8, 128)
        assert gnn <= scnn <= mpsn <= closed_form_bound("mpsn", st.counts, [1, 1, 1], 3)


def test_full_arrangement_runtime():
    A = build_arrangement(triangle(), "mpsn", generic_weights(np.random.default_rng(0), [1, 1, 1], 3))
    t = time.perf_counter()
    whitney_count(A)
    assert time.perf_counter() - t < 60


def test_closed_form_bounds():
    counts = (3, 3, 1)
    assert closed_form_bound("gnn", counts, [1, 1, 1], 3) == 8
    assert closed_form_bound("scnn", counts, [1, 1, 1], 3) == 128
    detail = closed_form_bound("mpsn", counts, [1, 1, 1], 3, detail=True)
    assert detail == {"product": 663552, "trivial": 120920, "bound": 120920}
    with pytest.raises(ValueError):
        closed_form_bound("transformer", counts, [1], 3)
    with pytest.raises(ValueError):
        closed_form_bound("scnn", counts, [1, 1], 3)


def test_rank_condition():
    assert not rank_condition(triangle(), [1, 1, 1])
    edge = BoundaryStack.from_complex(complex_from_simplices([(0, 1)]))
    assert rank_condition(edge, [1, 1], M="hodge")
    assert not rank_condition(edge, [2, 1], M="hodge")
    big = BoundaryStack.from_complex(complex_from_simplices([(i, i + 1) for i in range(17)]))
    with pytest.raises(CapacityError):
        rank_condition(big, [1, 1])


def test_arrangement_errors():
    st = triangle()
    with pytest.raises(ValueError):
        build_arrangement(st, "mpsn", [np.ones((1, 3))])
    with pytest.raises(ValueError):
        build_arrangement(st, "scnn", [np.ones((1, 3)), np.ones((1, 2)), np.ones((1, 3))])
    with pytest.raises(ValueError):
        build_arrangement(st, "mlp", [np.ones((1, 3))] * 3)


def test_slice_counts_through_origin():
    W = np.array([[1.0, 0], [0, 1], [1, 1]])
    res = slice_regions(W, [0, 0], [1, 0], [0, 1], resolution=64)
    assert res.count == 6 == whitney_count(W).count
    assert res.labels.shape == (64, 64) and res.labels[0, 0] == 0
    assert res.region.method == "slice_lower_bound"


@pytest.mark.parametrize("arch", ["gnn", "scnn", "mpsn"])
def test_slice_is_lower_bound(arch):
    st = triangle()
    rng = np.random.default_rng(3)
    A = build_arrangement(st, arch, generic_weights(rng, [1, 1, 1], 3))
    N = A.shape[1]
    res = slice_regions(A, rng.normal(size=N) * 0.1, rng.normal(size=N), rng.normal(size=N), resolution=48)
    assert 1 <= res.count <= whitney_count(A).count


def test_slice_csv(tmp_path):
    res = slice_regions(np.eye(2), [0, 0], [1, 0], [0, 1], resolution=16)
    res.write_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "x,y,region_label" and len(lines) == 1 + 16 * 16


@pytest.mark.parametrize("kwargs", [
    dict(basepoint=[0, 0], u=[1, 0], v=[2, 0]),
    dict(basepoint=[0, 0], u=[1, 0], v=[0, 1], resolution=8),
    dict(basepoint=[0, 0, 0], u=[1, 0, 0], v=[0, 1, 0]),
])
def test_slice_errors(kwargs):
    with pytest.raises(ValueError):
        slice_regions(np.eye(2), **kwargs)


def test_populated_arrangement():
    st = triangle()
    Ws = generic_weights(np.random.default_rng(0), [1, 1], 3)
    zero = populated_features_arrangement(st, Ws, np.zeros((3, 3)))
    assert whitney_count(zero).count == whitney_count(build_arrangement(st, "gnn", Ws)).count
    # edge features as the sum of their endpoint features
    C = np.abs(st.B(1).toarray().T)
    populated = whitney_count(populated_features_arrangement(st, Ws, C)).count
    assert populated == lp_region_count(populated_features_arrangement(st, Ws, C).normals)
    with pytest.raises(ValueError):
        populated_features_arrangement(st, Ws, np.zeros((2, 3)))
