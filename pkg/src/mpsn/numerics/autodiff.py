"""A small reverse-mode differentiation tape over numpy arrays.

Each :class:`Tensor` records the op that produced it and its operands.  Calling
:func:`backward` on a scalar walks the recorded graph in reverse topological
order and accumulates adjoints into ``.grad`` of every node that requires one.
Backward rules live in ``_RULES`` keyed by op kind; a node whose kind has no
rule cannot be differentiated.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp


class UnsupportedOpError(RuntimeError):
    pass


class Tensor:
    __slots__ = ("value", "grad", "op", "parents", "ctx", "requires_grad", "name")

    def __init__(self, value, requires_grad: bool = False, op: str = "leaf",
                 parents: Sequence["Tensor"] = (), ctx=None, name: str | None = None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.op = op
        self.parents = tuple(parents)
        self.ctx = ctx
        self.requires_grad = requires_grad or any(p.requires_grad for p in self.parents)
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Tensor(op={self.op}, shape={self.shape})"

    def zero_grad(self):
        self.grad = None

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, scale(_wrap(other), -1.0))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(value, op, parents, ctx=None) -> Tensor:
    return Tensor(value, op=op, parents=parents, ctx=ctx)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


# -- forward ops -------------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    return _node(a.value + b.value, "add", (a, b))


def mul(a, b) -> Tensor:
    """Elementwise product (broadcasting)."""
    a, b = _wrap(a), _wrap(b)
    return _node(a.value * b.value, "mul", (a, b))


def scale(a: Tensor, c: float) -> Tensor:
    return _node(a.value * c, "scale", (a,), c)


def matmul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.value.shape[-1] != b.value.shape[-2 if b.value.ndim > 1 else 0]:
        raise ValueError(f"dimension mismatch {a.shape} @ {b.shape}")
    return _node(a.value @ b.value, "matmul", (a, b))


def spmm(op: sp.spmatrix, x: Tensor) -> Tensor:
    """Constant sparse (or dense) operator applied on the simplex axis.

    ``x`` is ``(S, d)`` or batched ``(B, S, d)``; the result has the operator's
    row count in place of ``S``.
    """
    x = _wrap(x)
    if op.shape[1] != x.shape[-2]:
        raise ValueError(f"operator {op.shape} does not match features {x.shape}")
    return _node(_apply(op, x.value), "spmm", (x,), op)


def _apply(op, v: np.ndarray) -> np.ndarray:
    if v.ndim == 2:
        return np.asarray(op @ v)
    b, s, d = v.shape
    flat = np.moveaxis(v, 0, 1).reshape(s, b * d)
    out = np.asarray(op @ flat)
    return np.moveaxis(out.reshape(op.shape[0], b, d), 1, 0)


def tanh(a: Tensor) -> Tensor:
    return _node(np.tanh(a.value), "tanh", (a,))


def relu(a: Tensor) -> Tensor:
    return _node(np.maximum(a.value, 0.0), "relu", (a,))


def elu(a: Tensor) -> Tensor:
    v = a.value
    return _node(np.where(v > 0, v, np.expm1(np.minimum(v, 0.0))), "elu", (a,))


def identity(a: Tensor) -> Tensor:
    return a


def absolute(a: Tensor) -> Tensor:
    return _node(np.abs(a.value), "abs", (a,))


ACTIVATIONS: dict[str, Callable[[Tensor], Tensor]] = {
    "relu": relu, "tanh": tanh, "identity": identity, "id": identity, "elu": elu,
}


def activation(name: str) -> Callable[[Tensor], Tensor]:
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ValueError(f"unknown activation {name!r}") from None


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    return _node(a.value.sum(axis=axis, keepdims=keepdims), "sum", (a,), (axis, keepdims))


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    n = a.value.size if axis is None else a.value.shape[axis]
    return scale(tsum(a, axis, keepdims), 1.0 / max(n, 1))


def concat(parts: Sequence[Tensor], axis: int = -1) -> Tensor:
    parts = [_wrap(p) for p in parts]
    sizes = [p.value.shape[axis] for p in parts]
    return _node(np.concatenate([p.value for p in parts], axis=axis), "concat", parts, (axis, sizes))


def gather(a: Tensor, index: np.ndarray) -> Tensor:
    """Rows ``a[..., index, :]`` along the simplex axis (second to last)."""
    index = np.asarray(index, dtype=np.int64)
    return _node(np.take(a.value, index, axis=-2), "gather", (a,), index)


def scatter_add(a: Tensor, index: np.ndarray, size: int) -> Tensor:
    """Sum rows of ``a`` into ``size`` output rows, row ``i`` going to ``index[i]``."""
    index = np.asarray(index, dtype=np.int64)
    shape = list(a.value.shape)
    shape[-2] = size
    out = np.zeros(shape)
    if index.size:
        if a.value.ndim == 2:
            np.add.at(out, index, a.value)
        else:
            np.add.at(out, (slice(None), index), a.value)
    return _node(out, "scatter_add", (a,), index)


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean softmax cross-entropy over rows of ``logits``."""
    labels = np.asarray(labels, dtype=np.int64)
    z = logits.value - logits.value.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = -logp[np.arange(len(labels)), labels].mean()
    return _node(loss, "cross_entropy", (logits,), (np.exp(logp), labels))


# -- backward rules ------------------------------------------------------------

def _g_add(node, g):
    a, b = node.parents
    return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)


def _g_mul(node, g):
    a, b = node.parents
    return _unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)


def _g_scale(node, g):
    return (g * node.ctx,)


def _g_matmul(node, g):
    a, b = node.parents
    av, bv = a.value, b.value
    if bv.ndim == 1:
        ga = np.multiply.outer(g, bv)
        gb = np.tensordot(av, g, axes=(tuple(range(av.ndim - 1)), tuple(range(g.ndim))))
        return ga, gb
    if av.ndim == 1:
        return bv @ g, np.multiply.outer(av, g)
    ga = g @ np.swapaxes(bv, -1, -2)
    gb = np.swapaxes(av, -1, -2) @ g
    return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)


def _g_spmm(node, g):
    return (_apply(node.ctx.T, g),)


def _g_tanh(node, g):
    return (g * (1.0 - node.value ** 2),)


def _g_relu(node, g):
    # subgradient 0 at exactly 0
    return (g * (node.parents[0].value > 0),)


def _g_elu(node, g):
    v = node.parents[0].value
    return (g * np.where(v > 0, 1.0, node.value + 1.0),)


def _g_abs(node, g):
    return (g * np.sign(node.parents[0].value),)


def _g_sum(node, g):
    axis, keepdims = node.ctx
    shape = node.parents[0].shape
    if axis is not None and not keepdims:
        g = np.expand_dims(g, axis)
    return (np.broadcast_to(g, shape).copy(),)


def _g_concat(node, g):
    axis, sizes = node.ctx
    cuts = np.cumsum(sizes)[:-1]
    return tuple(np.split(g, cuts, axis=axis))


def _g_gather(node, g):
    a = node.parents[0]
    out = np.zeros(a.shape)
    if a.value.ndim == 2:
        np.add.at(out, node.ctx, g)
    else:
        np.add.at(out, (slice(None), node.ctx), g)
    return (out,)


def _g_scatter(node, g):
    return (np.take(g, node.ctx, axis=-2),)


def _g_xent(node, g):
    probs, labels = node.ctx
    d = probs.copy()
    d[np.arange(len(labels)), labels] -= 1.0
    return (g * d / len(labels),)


_RULES = {
    "add": _g_add, "mul": _g_mul, "scale": _g_scale, "matmul": _g_matmul,
    "spmm": _g_spmm, "tanh": _g_tanh, "relu": _g_relu, "elu": _g_elu,
    "abs": _g_abs, "sum": _g_sum, "concat": _g_concat, "gather": _g_gather,
    "scatter_add": _g_scatter, "cross_entropy": _g_xent,
}


def _topo(root: Tensor) -> list[Tensor]:
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(node) into ``.grad`` of every leaf requiring grad."""
    if loss.value.size != 1:
        raise ValueError("backward needs a scalar loss")
    adj = {id(loss): np.ones_like(loss.value)}
    for node in reversed(_topo(loss)):
        g = adj.pop(id(node), None)
        if g is None:
            continue
        if node.op == "leaf":
            node.grad = g if node.grad is None else node.grad + g
            continue
        rule = _RULES.get(node.op)
        if rule is None:
            raise UnsupportedOpError(f"no backward rule for op {node.op!r}")
        for parent, pg in zip(node.parents, rule(node, g)):
            if parent.requires_grad:
                key = id(parent)
                adj[key] = pg if key not in adj else adj[key] + pg
