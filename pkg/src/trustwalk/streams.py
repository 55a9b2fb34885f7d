"""Counter-based uniform draws keyed by (seed, query, walk, step, slot).

Every draw is a pure function of its key, so a walk sees the same numbers no
matter how walks are batched or spread over workers. The mixer is the
SplitMix64 finaliser; scalar and numpy versions give identical bits.
"""
from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 1.0 / (1 << 53)


def mix(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def mix_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_M1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_M2)
    z ^= z >> np.uint64(31)
    return z


def derive_key(seed: int, *parts: int) -> int:
    z = mix(int(seed) + GOLDEN)
    for p in parts:
        z = mix(z ^ mix(int(p) + GOLDEN))
    return z


def walk_key(query_key: int, walk: int) -> int:
    return mix(query_key ^ mix(int(walk) + GOLDEN))


def walk_keys(query_key: int, walks: np.ndarray) -> np.ndarray:
    walks = np.asarray(walks).astype(np.uint64)
    inner = mix_array(walks + np.uint64(GOLDEN))
    return mix_array(np.uint64(query_key) ^ inner)


def _counter(step: int, slot: int) -> int:
    return ((2 * step + slot + 1) * GOLDEN) & MASK


def uniform(key: int, step: int, slot: int) -> float:
    return (mix(key + _counter(step, slot)) >> 11) * _INV53


def uniform_array(keys: np.ndarray, step: int, slot: int) -> np.ndarray:
    z = mix_array(keys + np.uint64(_counter(step, slot)))
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


class WalkStream:
    """Draws for a single walk."""

    def __init__(self, key: int):
        self.key = key & MASK

    @classmethod
    def for_walk(cls, seed, source, item, walk):
        return cls(walk_key(derive_key(seed, source, item), walk))

    def uniform(self, step: int, slot: int) -> float:
        return uniform(self.key, step, slot)
