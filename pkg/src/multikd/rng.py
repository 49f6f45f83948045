"""Deterministic pseudo-randomness for datasets, init, and shuffling.

splitmix64 is used as the single generator everywhere: it is tiny,
public-domain, and exactly reproducible from pure 64-bit integer
arithmetic, so identical seeds give identical streams on any platform.
Standard normals come from the basic Box-Muller transform applied to
two consecutive uniform draws.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO64 = float(1 << 64)


class SplitMix64:
    """splitmix64 with the published constants; state is one uint64."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform real in [0, 1): next_u64 / 2^64."""
        return self.next_u64() / _TWO64

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via the multiply-shift trick."""
        if n <= 0:
            raise ValueError("n must be positive")
        return (self.next_u64() * n) >> 64

    def gauss_pair(self) -> tuple[float, float]:
        """Two standard normals from two consecutive uniform draws.

        Uses log(1 - u1), which never sees zero because u1 < 1.
        """
        u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(1.0 - u1))
        return r * math.cos(2.0 * math.pi * u2), r * math.sin(2.0 * math.pi * u2)

    def permutation(self, n: int) -> list[int]:
        """Fisher-Yates shuffle of range(n)."""
        order = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            order[i], order[j] = order[j], order[i]
        return order


def derive_seed(seed: int, index: int) -> int:
    """Substream seed: first splitmix64 output of state (seed + index)."""
    return SplitMix64((int(seed) + int(index)) & _MASK64).next_u64()
