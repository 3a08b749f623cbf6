"""Portable seeded PRNG used for corpus shuffling and synthesis.

The generator is a 64-bit linear congruential generator with Knuth's MMIX
constants::

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2**64

Each call to :meth:`LCG.next_u32` advances the state once and returns the high
32 bits.  The state is seeded as ``seed mod 2**64`` and advanced once before
first use.  Because the algorithm is fixed here (rather than delegated to a
library whose stream may change between versions) a split produced from a
given seed is reproducible on any platform.
"""

from __future__ import annotations

from typing import MutableSequence, Sequence, TypeVar

T = TypeVar("T")

_MULT = 6364136223846793005
_INC = 1442695040888963407
_MASK = (1 << 64) - 1


class LCG:
    def __init__(self, seed: int = 0):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self._state = seed & _MASK
        self.next_u32()

    def next_u32(self) -> int:
        self._state = (_MULT * self._state + _INC) & _MASK
        return self._state >> 32

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection sampling (unbiased)."""
        if n <= 0:
            raise ValueError("n must be positive")
        if n > 1 << 32:
            raise ValueError("n must be at most 2**32")
        limit = (1 << 32) - ((1 << 32) % n)
        while True:
            r = self.next_u32()
            if r < limit:
                return r % n

    def random(self) -> float:
        """Uniform float in ``[0, 1)`` with 53 random bits."""
        a = self.next_u32() >> 5
        b = self.next_u32() >> 6
        return (a * 67108864 + b) / 9007199254740992.0

    def shuffle(self, items: MutableSequence[T]) -> None:
        """In-place Fisher-Yates shuffle (Durstenfeld variant, high to low)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def choice(self, items: Sequence[T]) -> T:
        return items[self.randbelow(len(items))]


def permutation(n: int, seed: int) -> list[int]:
    idx = list(range(n))
    LCG(seed).shuffle(idx)
    return idx
