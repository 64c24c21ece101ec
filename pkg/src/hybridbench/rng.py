"""Seeded splitmix-style 64-bit generator.

The state advances by a fixed odd constant and the output is a bijective
finalizer, so the k-th draw is a closed form of (seed, k) and whole
streams can be produced vectorized. Datasets built from it are
reproducible across implementations of the same public algorithm.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(state: int) -> tuple[int, int]:
    """Advance one step; returns (new_state, output)."""
    state = (state + _GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return state, z ^ (z >> 31)


class SplitMix64:
    """Stateful sequential view of the same stream as splitmix64_array."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state, out = splitmix64(self.state)
        return out

    def next_below(self, bound: int) -> int:
        return self.next_u64() % bound

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


def splitmix64_array(seed: int, n: int) -> np.ndarray:
    """Draws 1..n of the stream for `seed`, as uint64, fully vectorized."""
    k = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(seed & MASK64) + k * np.uint64(_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def mix_seed(seed: int, salt: int) -> int:
    """Derive an independent substream seed from (seed, salt)."""
    _, out = splitmix64((seed ^ (salt * _MIX2)) & MASK64)
    return out


def uniform_floats(seed: int, n: int) -> np.ndarray:
    """n floats in [0, 1)."""
    return (splitmix64_array(seed, n) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def uniform_ints(seed: int, n: int, bound: int) -> np.ndarray:
    """n ints in [0, bound); the tiny modulo bias is irrelevant here."""
    return (splitmix64_array(seed, n) % np.uint64(bound)).astype(np.int64)
