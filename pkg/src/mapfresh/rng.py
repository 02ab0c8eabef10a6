"""Portable deterministic random streams.

Every random draw in this package comes from SplitMix64, a 64-bit mixing
generator with a tiny public reference implementation. Using one fixed,
well-known generator (instead of a platform RNG) means any reimplementation
in any language can reproduce scenarios, trajectories, and simulation runs
byte for byte from the integer seed alone.

Stream derivation rule: the child stream for index i is a SplitMix64 stream
seeded with the (i+1)-th output of a master SplitMix64 stream seeded with
the parent seed. Child streams therefore depend only on (seed, index), which
is what makes generated vehicle populations prefix-stable: vehicle i is
identical in every population of size > i drawn from the same seed.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """Reference SplitMix64 sequence over 64-bit state."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        # Top 53 bits -> uniform double in [0, 1).
        return (self.next_u64() >> 11) * 2.0**-53

    def next_uniform(self, lo: float, hi: float) -> float:
        return lo + self.next_unit() * (hi - lo)

    def next_index(self, n: int) -> int:
        """Draw from range(n). Uses the documented modulo rule."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def next_exponential(self, rate: float) -> float:
        if rate <= 0.0:
            raise ValueError("rate must be positive")
        # next_unit() < 1 keeps the log argument strictly positive.
        return -math.log1p(-self.next_unit()) / rate


def substream(seed: int, index: int) -> SplitMix64:
    """Child stream number `index` of a master seed (see module docstring)."""
    if index < 0:
        raise ValueError("index must be >= 0")
    master = SplitMix64(seed)
    child_seed = master.next_u64()
    for _ in range(index):
        child_seed = master.next_u64()
    return SplitMix64(child_seed)
