"""Complete networks: the SIN embedder and the edge-flow classifiers."""
from __future__ import annotations

import numpy as np

from ..complex import SimplicialComplex
from ..numerics import autodiff as ad
from ..numerics.autodiff import Tensor
from .layers import MLP, FlowLayer, FlowOperators, Module, Readout, SINLayer
from .structure import BoundaryStack

FLOW_MODELS = ("mpsn-tanh", "mpsn-id", "mpsn-relu", "mpsn-l0inv", "gnn-l0inv")


def lifted_features(K: SimplicialComplex, node_features, mode: str = "sum") -> list[np.ndarray]:
    """Vertex features as given; each higher simplex gets the sum (or mean) of its vertices'."""
    X = np.asarray(node_features, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if len(X) != K.count(0):
        raise ValueError(f"{len(X)} vertex feature rows for {K.count(0)} vertices")
    row = {v[0]: i for i, v in enumerate(K.simplices[0])}
    out = [X.copy()]
    for k in range(1, K.dim + 1):
        idx = np.array([[row[v] for v in s] for s in K.simplices[k]], dtype=np.int64)
        agg = X[idx].sum(axis=1)
        if mode == "mean":
            agg = agg / (k + 1)
        elif mode != "sum":
            raise ValueError(f"unknown population mode {mode!r}")
        out.append(agg)
    return out


class SIN(Module):
    """Untrained-by-default simplicial isomorphism network producing complex embeddings."""

    def __init__(self, rng, dims: int, d_in: int = 1, hidden: int = 16, layers: int = 5,
                 activation: str = "elu"):
        widths = [d_in] + [hidden] * layers
        self.layers = [SINLayer(rng, dims, a, b, activation) for a, b in zip(widths[:-1], widths[1:])]
        self.readout = Readout(rng, dims, hidden, 2 * hidden, hidden, activation=activation)

    def embed_features(self, stack: BoundaryStack, Hs) -> list[Tensor]:
        for layer in self.layers:
            Hs = layer(stack, Hs)
        return Hs

    def __call__(self, stack: BoundaryStack, Hs) -> Tensor:
        return self.readout(self.embed_features(stack, Hs))

    def embed(self, K: SimplicialComplex, node_features=None) -> np.ndarray:
        if node_features is None:
            node_features = np.ones(K.count(0))
        return self(BoundaryStack.from_complex(K), lifted_features(K, node_features)).value


class FlowClassifier(Module):
    """Edge-flow trajectory classifier.

    ``mpsn-tanh`` / ``mpsn-id`` / ``mpsn-relu`` use orientation-weighted lower
    and upper messages with the named activation and ``|H|`` before the sum
    readout.  The ``*-l0inv`` models take ``|x|`` as input and ignore
    orientations; ``gnn-l0inv`` also drops upper adjacencies.
    """

    def __init__(self, rng, kind: str, hidden: int = 64, layers: int = 4, d_in: int = 1,
                 n_classes: int = 2, invariant_activation: str = "tanh"):
        if kind not in FLOW_MODELS:
            raise ValueError(f"unknown flow model {kind!r}; choose from {FLOW_MODELS}")
        self.kind = kind
        self.oriented = not kind.endswith("l0inv")
        act = {"mpsn-tanh": "tanh", "mpsn-id": "identity", "mpsn-relu": "relu"}.get(kind, invariant_activation)
        upper = kind != "gnn-l0inv"
        widths = [d_in] + [hidden] * layers
        self.layers = [FlowLayer(rng, a, b, act, upper) for a, b in zip(widths[:-1], widths[1:])]
        self.head = MLP(rng, [hidden, hidden, n_classes], "relu", final_activation="identity")

    def operators(self, stack: BoundaryStack) -> FlowOperators:
        return FlowOperators(stack, oriented=self.oriented)

    def __call__(self, ops: FlowOperators, X, signs=None) -> Tensor:
        """Logits for a batch ``X`` of shape ``B x S_1 x d``."""
        H = X if isinstance(X, Tensor) else Tensor(X)
        if not self.oriented:
            H = ad.absolute(H)
            signs = None
        for layer in self.layers:
            H = layer(ops, H, signs)
        if self.oriented:
            H = ad.absolute(H)
        return self.head(ad.tsum(H, axis=-2))
