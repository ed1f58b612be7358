"""Seeded, portable random number generation.

Every random decision in the pipeline flows through SplitMix64 so that
"same seed => same output" holds across platforms and across independent
reimplementations.  The generator, the uniform/Gaussian conversions, and
the without-replacement sampler are all pinned here; nothing may fall
back to `random` or `numpy.random`.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# FNV-1a 64-bit, used to fold string keys into substream seeds.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    """SplitMix64 output function (Stafford variant 13)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


class SplitMix64:
    """Minimal deterministic PRNG with a 64-bit state.

    State advances by the golden-ratio increment and is mixed on output.
    One `next_u64` call per output word; higher-level draws document how
    many words they consume so parallel replays stay aligned.
    """

    def __init__(self, seed: int) -> None:
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN_GAMMA) & MASK64
        return mix64(self._state)

    def next_float(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits of one word."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_gaussian(self) -> float:
        """Standard normal via Box-Muller on two consecutive words.

        u1 is shifted into (0, 1] so the log is always finite; only the
        cosine branch is returned (no caching) so every Gaussian costs
        exactly two words.
        """
        u1 = ((self.next_u64() >> 11) + 1) * 2.0**-53
        u2 = (self.next_u64() >> 11) * 2.0**-53
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def randint(self, n: int) -> int:
        """Unbiased uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("randint bound must be positive")
        limit = (2**64 // n) * n
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def sample(self, n: int, m: int) -> list[int]:
        """m distinct indices from range(n), partial Fisher-Yates order."""
        if m > n:
            raise ValueError(f"cannot sample {m} items from {n}")
        items = list(range(n))
        for i in range(m):
            j = i + self.randint(n - i)
            items[i], items[j] = items[j], items[i]
        return items[:m]


def substream_seed(seed: int, index: int) -> int:
    """Seed for the index-th child stream of a run seed.

    Equals the (index+1)-th raw output of the stream seeded with `seed`,
    so children never depend on how many draws siblings consumed.
    """
    return mix64((seed + (index + 1) * GOLDEN_GAMMA) & MASK64)


def key_seed(seed: int, key: str) -> int:
    """Seed for a child stream addressed by a string key."""
    return mix64(((seed ^ fnv1a64(key)) + GOLDEN_GAMMA) & MASK64)
