from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp

from mpsn.numerics import SGD, Adam, StepSchedule, Tensor, UnsupportedOpError, backward
from mpsn.numerics import autodiff as ad
from mpsn.numerics.linalg import kron, rank_with_tolerance, unvec, vec

from helpers import finite_difference_check


@pytest.mark.parametrize("a, r", [(np.eye(3), 3), ([[1, 2], [2, 4]], 1), (np.zeros((2, 3)), 0)])
def test_rank_examples(a, r):
    assert rank_with_tolerance(a) == r


@pytest.mark.parametrize("seed", range(10))
def test_rank_matches_svd(seed):
    rng = np.random.default_rng(seed)
    rows, cols, true_rank = rng.integers(1, 9, size=3)
    true_rank = min(true_rank, rows, cols)
    a = rng.uniform(-1, 1, (rows, true_rank)) @ rng.uniform(-1, 1, (true_rank, cols))
    assert rank_with_tolerance(a) == np.linalg.matrix_rank(a) == true_rank
    perm_r, perm_c = rng.permutation(rows), rng.permutation(cols)
    assert rank_with_tolerance(a[perm_r][:, perm_c]) == true_rank


def test_rank_rejects_non_finite():
    with pytest.raises(ValueError):
        rank_with_tolerance([[np.nan, 1.0]])


def test_kron_and_vec():
    swap = np.array([[0, 1], [1, 0]])
    assert (kron(np.eye(2), swap) == np.block([[swap, np.zeros((2, 2))], [np.zeros((2, 2)), swap]])).all()
    assert vec([[1, 2], [3, 4]]).tolist() == [1, 3, 2, 4]
    assert (unvec(vec([[1, 2], [3, 4]]), 2, 2) == [[1, 2], [3, 4]]).all()


@pytest.mark.parametrize("seed", range(5))
def test_roth_identity(seed):
    rng = np.random.default_rng(seed)
    M, H, W = (rng.normal(size=(3, 3)) for _ in range(3))
    assert np.abs(vec(M @ H @ W) - kron(W.T, M) @ vec(H)).max() < 1e-12


def test_simple_gradients():
    x = Tensor(np.arange(4.0), requires_grad=True)
    backward(ad.tsum(x))
    assert (x.grad == 1).all()
    X = np.random.default_rng(0).normal(size=(5, 3))
    W = Tensor(np.ones((3, 2)), requires_grad=True)
    backward(ad.tsum(ad.matmul(X, W)))
    assert np.allclose(W.grad, X.T @ np.ones((5, 2)))


def _away_from_kinks(rng, shape):
    x = rng.normal(size=shape)
    x[np.abs(x) < 1e-3] = 0.5
    return x


_FIXED_3 = np.array([[1.0, -2.0, 0.5], [0.0, 1.0, 3.0], [2.0, 0.0, -1.0]])
_FIXED_4 = np.arange(16.0).reshape(4, 4) / 10 - 0.7

OPS = {
    "add": lambda a, b: ad.add(a, b),
    "mul": lambda a, b: ad.mul(a, b),
    "scale": lambda a, b: ad.scale(a, -1.7) + b,
    "matmul": lambda a, b: ad.matmul(a, Tensor(_FIXED_4)) + ad.matmul(Tensor(_FIXED_3), b),
    "tanh": lambda a, b: ad.tanh(a) * b,
    "relu": lambda a, b: ad.relu(a) * b,
    "elu": lambda a, b: ad.elu(a) * b,
    "abs": lambda a, b: ad.absolute(a) * b,
    "identity": lambda a, b: ad.identity(a) - b,
    "concat": lambda a, b: ad.concat([a, b], axis=-1),
    "mean": lambda a, b: ad.mean(a * b, axis=0, keepdims=True),
    "gather": lambda a, b: ad.gather(a, np.array([2, 0, 0, 1])) * ad.gather(b, np.array([0, 1, 2, 0])),
    "scatter": lambda a, b: ad.scatter_add(a, np.array([1, 1, 0]), 3) * b,
    "spmm": lambda a, b: ad.spmm(sp.csr_matrix(np.array([[1.0, 2, 0], [0, 1, -1], [3, 0, 0]])), a) * b,
}


@pytest.mark.parametrize("name", sorted(OPS))
def test_op_gradients(name):
    rng = np.random.default_rng(sorted(OPS).index(name))
    a = Tensor(_away_from_kinks(rng, (3, 4)), requires_grad=True)
    b = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
    c = rng.normal(size=(4, 8))

    def loss():
        out = OPS[name](a, b)
        return ad.tsum(ad.mul(out, c[: out.shape[0], : out.shape[1]]))

    assert finite_difference_check(loss, [a, b]) < 1e-5


def test_cross_entropy_gradient():
    rng = np.random.default_rng(0)
    logits = Tensor(rng.normal(size=(6, 3)), requires_grad=True)
    labels = rng.integers(0, 3, size=6)
    assert finite_difference_check(lambda: ad.cross_entropy(logits, labels), [logits]) < 1e-5
    p = np.exp(logits.value) / np.exp(logits.value).sum(axis=1, keepdims=True)
    expected = -np.log(p[np.arange(6), labels]).mean()
    assert abs(float(ad.cross_entropy(logits, labels).value) - expected) < 1e-12


def test_two_layer_tanh_network():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(8, 4))
    W1 = Tensor(rng.normal(size=(4, 5)), requires_grad=True)
    W2 = Tensor(rng.normal(size=(5, 2)), requires_grad=True)
    y = rng.integers(0, 2, size=8)
    loss = lambda: ad.cross_entropy(ad.matmul(ad.tanh(ad.matmul(X, W1)), W2), y)
    assert finite_difference_check(loss, [W1, W2]) < 1e-5


def test_relu_subgradient_at_zero():
    x = Tensor(np.array([-1.0, 0.0, 2.0]), requires_grad=True)
    backward(ad.tsum(ad.relu(x)))
    assert x.grad.tolist() == [0.0, 0.0, 1.0]


def test_unsupported_op():
    x = Tensor(np.ones(2), requires_grad=True)
    y = ad._node(x.value * 2, "mystery", (x,))
    with pytest.raises(UnsupportedOpError):
        backward(ad.tsum(y))


def test_schedule():
    s = StepSchedule(1e-3, 0.5, 20)
    assert [s(e) for e in (0, 19, 20, 45)] == [1e-3, 1e-3, 5e-4, 2.5e-4]


@pytest.mark.parametrize("opt_cls", [SGD, Adam])
def test_optimizers_reduce_quadratic(opt_cls):
    w = Tensor(np.array([3.0, -2.0]), requires_grad=True)
    opt = opt_cls([w], lr=0.1)
    for _ in range(200):
        opt.zero_grad()
        backward(ad.tsum(ad.mul(w, w)))
        opt.step()
    assert np.abs(w.value).max() < 0.05
