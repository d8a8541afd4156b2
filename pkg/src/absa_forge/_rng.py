"""Pinned pseudo-random source used wherever reproducibility crosses file or
language boundaries (few-shot subsetting, corpus emission, template draws).

The generator is splitmix64 over a 64-bit state.  Bounded draws use rejection
sampling so they are exactly uniform, and shuffles are Fisher-Yates from the
top index down.  The full recipe is written out in docs/determinism.md so a
non-Python consumer can replay any subset or emission byte for byte.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class Rng:
    """splitmix64 stream seeded with an unsigned 64-bit integer."""

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self._state = seed

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling (no modulo bias)."""
        if n <= 0:
            raise ValueError(f"randrange bound must be positive, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, top index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]


def mix(seed: int, salt: int) -> int:
    """Derive a child seed, e.g. for per-epoch re-emission.

    mix(seed, 0) == seed, so salt 0 is the identity stream.
    """
    if salt == 0:
        return seed
    return Rng((seed ^ ((salt * _GAMMA) & _MASK)) & _MASK).next_u64()
