"""Simplex relabelings and orientation flips acting on (features, boundaries)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .structure import BoundaryStack


@dataclass(frozen=True)
class SimplexPermutation:
    """``perms[k][i]`` is the new position of k-simplex ``i``."""

    perms: tuple[np.ndarray, ...]

    def __post_init__(self):
        for k, p in enumerate(self.perms):
            p = np.asarray(p)
            if sorted(p.tolist()) != list(range(len(p))):
                raise ValueError(f"dimension {k}: not a permutation")

    @classmethod
    def random(cls, counts, rng: np.random.Generator) -> "SimplexPermutation":
        return cls(tuple(rng.permutation(n) for n in counts))

    @classmethod
    def identity(cls, counts) -> "SimplexPermutation":
        return cls(tuple(np.arange(n) for n in counts))

    def apply_rows(self, k: int, H: np.ndarray) -> np.ndarray:
        H = np.asarray(H)
        out = np.empty_like(H)
        out[..., self.perms[k], :] = H
        return out


@dataclass(frozen=True)
class OrientationFlip:
    """Diagonals of ``T_0, ..., T_p``; vertices cannot be flipped."""

    signs: tuple[np.ndarray, ...]

    def __post_init__(self):
        for k, s in enumerate(self.signs):
            s = np.asarray(s)
            if not np.all(np.abs(s) == 1):
                raise ValueError(f"dimension {k}: flip entries must be +-1")
        if self.signs and not np.all(np.asarray(self.signs[0]) == 1):
            raise ValueError("T_0 must be the identity")

    @classmethod
    def random(cls, counts, rng: np.random.Generator) -> "OrientationFlip":
        signs = [np.ones(counts[0])] + [rng.choice([-1.0, 1.0], size=n) for n in counts[1:]]
        return cls(tuple(signs))

    @classmethod
    def identity(cls, counts) -> "OrientationFlip":
        return cls(tuple(np.ones(n) for n in counts))

    def compose(self, other: "OrientationFlip") -> "OrientationFlip":
        return OrientationFlip(tuple(np.asarray(a) * np.asarray(b) for a, b in zip(self.signs, other.signs)))

    def apply_rows(self, k: int, H: np.ndarray) -> np.ndarray:
        return np.asarray(self.signs[k], dtype=np.float64)[:, None] * np.asarray(H)


def apply_permutation(Hs, stack: BoundaryStack, P: SimplexPermutation):
    """``(P H, P B P^T)``."""
    if len(P.perms) != stack.dim + 1 or len(Hs) != stack.dim + 1:
        raise ValueError("permutation / features do not match the complex dimension")
    return [P.apply_rows(k, H) for k, H in enumerate(Hs)], stack.permute(P.perms)


def apply_flip(Hs, stack: BoundaryStack, T: OrientationFlip):
    """``(T H, T B T)``."""
    if len(T.signs) != stack.dim + 1 or len(Hs) != stack.dim + 1:
        raise ValueError("flip / features do not match the complex dimension")
    return [T.apply_rows(k, H) for k, H in enumerate(Hs)], stack.flip(T.signs)
