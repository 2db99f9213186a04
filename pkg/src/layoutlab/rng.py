"""Deterministic 64-bit PRNG used by the maze generator.

The generator is xorshift64* (Marsaglia xorshift followed by a multiplicative
scramble). Seeds are expanded with one SplitMix64 step so that small or
similar seeds still give well-mixed states, and so that a zero seed never
produces the (forbidden) all-zero xorshift state.

The exact algorithm is part of the maze file contract: changing it changes
every generated maze for a given seed.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_XORSHIFT_STAR_MULT = 0x2545F4914F6CDD1D


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64Star:
    __slots__ = ("_state",)

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        state = splitmix64(seed)
        self._state = state or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self._state = x
        return (x * _XORSHIFT_STAR_MULT) & MASK64

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = ((MASK64 + 1) // n) * n
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def split(self) -> "XorShift64Star":
        """Independent child stream derived from this one."""
        return XorShift64Star(self.next_u64())
