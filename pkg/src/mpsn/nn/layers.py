"""Simplicial layers built on the autodiff tape.

Feature stacks are plain lists ``[H_0, ..., H_p]`` of :class:`Tensor` (or
arrays) with ``H_n`` of shape ``S_n x d_n``.  Flow layers additionally accept
batched features of shape ``B x S_1 x d``.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from ..numerics import autodiff as ad
from ..numerics.autodiff import Tensor
from .structure import BoundaryStack


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / max(fan_in + fan_out, 1))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _t(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


class Module:
    def params(self) -> list[Tensor]:
        out = []
        for v in vars(self).values():
            if isinstance(v, Tensor) and v.requires_grad:
                out.append(v)
            elif isinstance(v, Module):
                out.extend(v.params())
            elif isinstance(v, (list, tuple)):
                for item in v:
                    if isinstance(item, Module):
                        out.extend(item.params())
                    elif isinstance(item, Tensor) and item.requires_grad:
                        out.append(item)
        return out

    def state(self) -> list[np.ndarray]:
        return [p.value.copy() for p in self.params()]

    def load_state(self, values: Sequence[np.ndarray]) -> None:
        for p, v in zip(self.params(), values):
            p.value[...] = v


class Dense(Module):
    def __init__(self, rng, d_in: int, d_out: int, bias: bool = True, activation: str = "identity"):
        self.W = Tensor(glorot(rng, d_in, d_out), requires_grad=True)
        self.b = Tensor(np.zeros(d_out), requires_grad=True) if bias else None
        self.act = ad.activation(activation)

    def __call__(self, x) -> Tensor:
        y = ad.matmul(_t(x), self.W)
        if self.b is not None:
            y = y + self.b
        return self.act(y)


class MLP(Module):
    """Stack of dense layers, each followed by ``activation``."""

    def __init__(self, rng, sizes: Sequence[int], activation: str = "relu", bias: bool = True,
                 final_activation: str | None = None):
        acts = [activation] * (len(sizes) - 1)
        if final_activation is not None:
            acts[-1] = final_activation
        self.layers = [Dense(rng, a, b, bias, act) for a, b, act in zip(sizes[:-1], sizes[1:], acts)]

    def __call__(self, x) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x


# -- GNN / SCNN -------------------------------------------------------------

def gnn_layer(H, W, aggregation=None, A=None, activation: str = "relu") -> Tensor:
    """``psi(Agg(H) W)`` with a linear aggregation operator (default ``A + I``)."""
    H, W = _t(H), _t(W)
    if aggregation is None:
        if A is None:
            raise ValueError("need an aggregation matrix or an adjacency matrix")
        aggregation = sp.csr_matrix(A) + sp.identity(np.shape(A)[0])
    if H.shape[-1] != W.shape[0]:
        raise ValueError(f"feature width {H.shape[-1]} does not match weights {W.shape}")
    return ad.activation(activation)(ad.matmul(ad.spmm(_as_op(aggregation), H), W))


def _as_op(m):
    return m if sp.issparse(m) else np.asarray(m, dtype=np.float64)


def operator(stack: BoundaryStack, kind: str, n: int):
    """The ``M_n`` / ``U_n`` / ``O_n`` choices used by the layers and region counts."""
    if kind == "shifted":
        return stack.shifted_laplacian(n)
    if kind == "hodge":
        return stack.laplacian(n)
    if kind == "identity":
        return sp.identity(stack.counts[n], format="csr")
    if kind == "boundary_T":
        return stack.B(n).T.tocsr()
    if kind == "coboundary":
        return stack.B(n + 1)
    raise ValueError(f"unknown operator {kind!r}")


def scnn_layer(stack: BoundaryStack, Hs, Ws, M: str | Sequence = "shifted", activation: str = "relu") -> list[Tensor]:
    """``H_n <- psi(M_n H_n W_n)`` independently for every dimension."""
    if len(Hs) != stack.dim + 1 or len(Ws) != stack.dim + 1:
        raise ValueError("one feature matrix and one weight per dimension required")
    act = ad.activation(activation)
    out = []
    for n, (H, W) in enumerate(zip(Hs, Ws)):
        Mn = operator(stack, M, n) if isinstance(M, str) else _as_op(M[n])
        H, W = _t(H), _t(W)
        _check(H, stack.counts[n], W)
        out.append(act(ad.matmul(ad.spmm(Mn, H), W)))
    return out


def scnn_polynomial(L, H, Ws, activation: str = "identity") -> Tensor:
    """``psi(sum_r L^r H W_r)`` for ``r = 0..R`` (``R = len(Ws) - 1``)."""
    H = _t(H)
    acc = None
    power = H
    L = _as_op(L)
    for r, W in enumerate(Ws):
        if r:
            power = ad.spmm(L, power)
        term = ad.matmul(power, _t(W))
        acc = term if acc is None else acc + term
    return ad.activation(activation)(acc)


def spectral_message_passing(stack: BoundaryStack, k: int, H: np.ndarray, Ws, activation: str = "identity") -> np.ndarray:
    """The polynomial convolution rewritten as explicit lower/upper messages.

    ``h_sigma' = psi(h_sigma W_0 + sum_tau sum_{r>=1} (((L_down)^r + (L_up)^r))_{sigma,tau} h_tau W_r)``;
    every nonzero coefficient is one message from ``tau`` to ``sigma``.
    """
    H = np.asarray(H, dtype=np.float64)
    down = stack.laplacian(k, "down").toarray()
    up = stack.laplacian(k, "up").toarray()
    out = H @ np.asarray(Ws[0])
    pd, pu = np.eye(len(H)), np.eye(len(H))
    for r in range(1, len(Ws)):
        pd, pu = pd @ down, pu @ up
        W = np.asarray(Ws[r])
        for coeffs in (pd, pu):
            for s, t in zip(*np.nonzero(coeffs)):
                out[s] += coeffs[s, t] * (H[t] @ W)
    return ad.activation(activation)(Tensor(out)).value


def _check(H: Tensor, rows: int, W: Tensor):
    if H.shape[-2] != rows:
        raise ValueError(f"features have {H.shape[-2]} rows, complex has {rows} simplices")
    if H.shape[-1] != W.shape[0]:
        raise ValueError(f"feature width {H.shape[-1]} does not match weights {W.shape}")


# -- general MPSN layer -------------------------------------------------------

def shared_weights(Ws: Sequence) -> dict[tuple[int, int], object]:
    """Weights keyed by (output dim, input dim), sharing ``W_j`` for every use of ``H_j``."""
    p = len(Ws) - 1
    return {(n, j): Ws[j] for n in range(p + 1) for j in (n - 1, n, n + 1) if 0 <= j <= p}


def mpsn_layer(stack: BoundaryStack, Hs, weights, activation: str = "relu",
               M: str = "shifted", U: str = "boundary_T", O: str = "coboundary") -> list[Tensor]:
    """``psi(M_n H_n W_n + U_n H_{n-1} W_{n-1} + O_n H_{n+1} W_{n+1})`` per dimension.

    ``weights`` is either a list ``[W_0, ..., W_p]`` (shared per input
    dimension) or a dict keyed by ``(n, j)``; missing keys drop the term.
    """
    p = stack.dim
    if len(Hs) != p + 1:
        raise ValueError(f"expected {p + 1} feature matrices, got {len(Hs)}")
    if not isinstance(weights, dict):
        weights = shared_weights(weights)
    Hs = [_t(H) for H in Hs]
    act = ad.activation(activation)
    out = []
    for n in range(p + 1):
        acc = None
        for j, kind in ((n, M), (n - 1, U), (n + 1, O)):
            if not 0 <= j <= p or (n, j) not in weights:
                continue
            W = _t(weights[(n, j)])
            _check(Hs[j], stack.counts[j], W)
            term = ad.matmul(ad.spmm(operator(stack, kind, n), Hs[j]), W)
            acc = term if acc is None else acc + term
        if acc is None:
            raise ValueError(f"no weights reach dimension {n}")
        out.append(act(acc))
    return out


class MPSNLayer(Module):
    def __init__(self, rng, d_in: Sequence[int], d_out: int, activation: str = "relu", **ops):
        self.Ws = [Tensor(glorot(rng, d, d_out), requires_grad=True) for d in d_in]
        self.activation = activation
        self.ops = ops

    def __call__(self, stack, Hs):
        return mpsn_layer(stack, Hs, self.Ws, self.activation, **self.ops)


class SCNNLayer(Module):
    def __init__(self, rng, d_in: Sequence[int], d_out: int, activation: str = "relu", M: str = "shifted"):
        self.Ws = [Tensor(glorot(rng, d, d_out), requires_grad=True) for d in d_in]
        self.activation = activation
        self.M = M

    def __call__(self, stack, Hs):
        return scnn_layer(stack, Hs, self.Ws, self.M, self.activation)


class GNNLayer(Module):
    def __init__(self, rng, d_in: int, d_out: int, activation: str = "relu"):
        self.W = Tensor(glorot(rng, d_in, d_out), requires_grad=True)
        self.activation = activation

    def __call__(self, aggregation, H):
        return gnn_layer(H, self.W, aggregation=aggregation, activation=self.activation)


# -- SIN ------------------------------------------------------------------------

class SINLayer(Module):
    """Boundary + upper message passing with GIN-style perceptrons.

    For a p-simplex: ``U(MLP_B((1+eps_B) h + sum_B h_delta) || MLP_up((1+eps_up) h +
    sum_up MLP_M(h_tau || h_{sigma cup tau})))``.
    """

    def __init__(self, rng, dims: int, d_in: int, d_out: int, activation: str = "elu",
                 eps_boundary: float = 0.0, eps_upper: float = 0.0):
        self.eps_boundary = eps_boundary
        self.eps_upper = eps_upper
        self.mlp_b = [MLP(rng, [d_in, d_out, d_out], activation) for _ in range(dims)]
        self.mlp_up = [MLP(rng, [d_in, d_out, d_out], activation) for _ in range(dims)]
        self.mlp_msg = [MLP(rng, [2 * d_in, d_in], activation) for _ in range(dims)]
        self.update = [MLP(rng, [2 * d_out, d_out], activation) for _ in range(dims)]

    def __call__(self, stack: BoundaryStack, Hs) -> list[Tensor]:
        if len(Hs) != stack.dim + 1 or len(Hs) > len(self.update):
            raise ValueError("feature stack does not match the layer / complex dimension")
        Hs = [_t(H) for H in Hs]
        out = []
        for k, H in enumerate(Hs):
            n = stack.counts[k]
            if H.shape[-2] != n:
                raise ValueError(f"dimension {k}: {H.shape[-2]} rows for {n} simplices")
            b_in = ad.scale(H, 1.0 + self.eps_boundary)
            sig, face = stack.boundary_index[k]
            if sig.size:
                b_in = b_in + ad.scatter_add(ad.gather(Hs[k - 1], face), sig, n)
            u_in = ad.scale(H, 1.0 + self.eps_upper)
            s, t, c = stack.upper_index[k]
            if s.size:
                pair = ad.concat([ad.gather(H, t), ad.gather(Hs[k + 1], c)], axis=-1)
                u_in = u_in + ad.scatter_add(self.mlp_msg[k](pair), s, n)
            both = ad.concat([self.mlp_b[k](b_in), self.mlp_up[k](u_in)], axis=-1)
            out.append(self.update[k](both))
        return out


def message_count(stack: BoundaryStack) -> int:
    """Number of messages one boundary+upper layer sends (as executed by :class:`SINLayer`).

    Vertices have an empty boundary; their boundary branch runs once on the
    vertex's own feature, which is counted as one message per vertex.
    """
    sent = sum(len(stack.boundary_index[k][0]) + len(stack.upper_index[k][0]) for k in range(stack.dim + 1))
    return sent + stack.counts[0]


def sin_layer(stack: BoundaryStack, Hs, layer: SINLayer) -> list[Tensor]:
    return layer(stack, Hs)


# -- orientation-aware edge-flow layer -----------------------------------------

class FlowOperators:
    """Lower/upper edge adjacencies with relative orientations (or unsigned)."""

    def __init__(self, stack: BoundaryStack, oriented: bool = True):
        self.n = stack.counts[1]
        self.lower = stack.lower_adjacency(1, oriented)
        self.upper = stack.upper_adjacency(1, oriented) if stack.dim >= 2 else sp.csr_matrix((self.n, self.n))


def _oriented_apply(A, H: Tensor, signs) -> Tensor:
    if signs is None or np.all(np.asarray(signs) == 1):
        return ad.spmm(A, H)
    t = np.asarray(signs, dtype=np.float64)[..., None]
    return ad.mul(ad.spmm(A, ad.mul(H, t)), t)


def flow_layer(ops: FlowOperators, H, W0, W1, W2=None, activation: str = "tanh", signs=None) -> Tensor:
    """``psi(H W0 + A_down H W1 + A_up H W2)`` on edge features.

    ``signs`` (``S_1`` or ``B x S_1``) applies the per-sample re-orientation
    ``T A T`` to the adjacencies; the features are expected to be flipped
    already.  ``W2=None`` drops the upper term.
    """
    H = _t(H)
    if H.shape[-2] != ops.n:
        raise ValueError(f"features have {H.shape[-2]} rows, complex has {ops.n} edges")
    acc = ad.matmul(H, _t(W0)) + ad.matmul(_oriented_apply(ops.lower, H, signs), _t(W1))
    if W2 is not None:
        acc = acc + ad.matmul(_oriented_apply(ops.upper, H, signs), _t(W2))
    return ad.activation(activation)(acc)


class FlowLayer(Module):
    def __init__(self, rng, d_in: int, d_out: int, activation: str = "tanh", upper: bool = True):
        self.W0 = Tensor(glorot(rng, d_in, d_out), requires_grad=True)
        self.W1 = Tensor(glorot(rng, d_in, d_out), requires_grad=True)
        self.W2 = Tensor(glorot(rng, d_in, d_out), requires_grad=True) if upper else None
        self.activation = activation

    def __call__(self, ops: FlowOperators, H, signs=None) -> Tensor:
        return flow_layer(ops, H, self.W0, self.W1, self.W2, self.activation, signs)


# -- readout ------------------------------------------------------------------------

def aggregate(H: Tensor, mode: str = "sum", invariant_abs: bool = False) -> Tensor:
    """Sum or mean over the simplex axis, optionally of ``|H|``."""
    if invariant_abs:
        H = ad.absolute(H)
    if mode == "sum":
        return ad.tsum(H, axis=-2)
    if mode == "mean":
        return ad.mean(H, axis=-2)
    raise ValueError(f"unknown readout mode {mode!r}")


class Readout(Module):
    """``head(sum_p proj_p(AGG_p(H_p)))``; empty dimensions contribute zero."""

    def __init__(self, rng, dims: int, d_in: int, d_proj: int, d_out: int, activation: str = "elu",
                 mode: str = "sum", invariant_abs: bool = False, head_activation: str | None = None):
        self.proj = [Dense(rng, d_in, d_proj, activation=activation) for _ in range(dims)]
        self.head = Dense(rng, d_proj, d_out, activation=head_activation or activation)
        self.mode = mode
        self.invariant_abs = invariant_abs
        self.d_proj = d_proj

    def __call__(self, Hs: Sequence) -> Tensor:
        total = None
        for k, H in enumerate(Hs):
            H = _t(H)
            if H.shape[-2] == 0:
                continue
            term = self.proj[k](aggregate(H, self.mode, self.invariant_abs))
            total = term if total is None else total + term
        if total is None:
            total = Tensor(np.zeros(self.d_proj))
        return self.head(total)


def readout(Hs: Sequence, mode: str = "sum", invariant_abs: bool = False,
            head: Callable | None = None) -> Tensor:
    """Parameter-free variant: per-dimension aggregates summed, then ``head``."""
    total = None
    for H in Hs:
        H = _t(H)
        if H.shape[-2] == 0:
            continue
        agg = aggregate(H, mode, invariant_abs)
        total = agg if total is None else total + agg
    if total is None:
        width = _t(Hs[0]).shape[-1] if Hs else 0
        total = Tensor(np.zeros(width))
    return head(total) if head is not None else total
