"""Deterministic seed derivation.

A master seed is expanded with splitmix64: ``derive(seed, "flow", 3)`` mixes
each key into the state in turn, so sibling tasks get independent streams
that do not depend on scheduling order.
"""
from __future__ import annotations

import hashlib
import os

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _key(k) -> int:
    if isinstance(k, (int, np.integer)):
        return int(k) & _MASK
    return int.from_bytes(hashlib.sha256(str(k).encode()).digest()[:8], "little")


def derive(seed: int, *keys) -> int:
    state = splitmix64(int(seed) & _MASK)
    for k in keys:
        state = splitmix64(state ^ _key(k))
    return state


def rng(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(derive(seed, *keys))


def worker_count() -> int:
    """Worker processes for driver-level parallelism (``MPSN_WORKERS``, default 1)."""
    try:
        return max(1, int(os.environ.get("MPSN_WORKERS", "1")))
    except ValueError:
        return 1
