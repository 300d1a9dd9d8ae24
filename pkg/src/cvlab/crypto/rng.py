"""Random bit sources.

Two realizations share one interface: :class:`SeededRandom` for reproducible
simulation runs and :class:`SystemRandom` backed by OS entropy. Every draw goes
through :meth:`RandomSource.next_bits`, so ``bits_consumed`` is an exact cursor
over everything a caller has pulled from the source.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass


@dataclass(frozen=True)
class Bits:
    """A fixed-width bit string; ``value`` holds the bits MSB-first."""

    value: int
    length: int

    def __post_init__(self):
        if self.length < 0 or self.value < 0 or self.value >> self.length:
            raise ValueError("value does not fit in length bits")

    def __len__(self) -> int:
        return self.length

    def to_bytes(self) -> bytes:
        if self.length % 8:
            raise ValueError("bit length is not a whole number of bytes")
        return self.value.to_bytes(self.length // 8, "big")

    def slice(self, start: int, stop: int) -> "Bits":
        """Bits ``[start, stop)`` counted from the most significant end."""
        if not 0 <= start <= stop <= self.length:
            raise IndexError("bit slice out of range")
        width = stop - start
        value = (self.value >> (self.length - stop)) & ((1 << width) - 1)
        return Bits(value, width)


class RandomSource:
    """Abstract bit generator. Subclasses implement :meth:`_draw`."""

    def __init__(self):
        self.bits_consumed = 0

    def _draw(self, count: int) -> int:
        raise NotImplementedError

    def next_bits(self, count: int) -> Bits:
        if count < 0:
            raise ValueError("count must be non-negative")
        value = self._draw(count) if count else 0
        self.bits_consumed += count
        return Bits(value, count)

    def random_bytes(self, n: int) -> bytes:
        return self.next_bits(8 * n).to_bytes()

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        k = (n - 1).bit_length()
        while True:
            r = self.next_bits(k).value
            if r < n:
                return r

    def randint(self, a: int, b: int) -> int:
        """Uniform integer in ``[a, b]`` inclusive."""
        return a + self.randbelow(b - a + 1)

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]


class SeededRandom(RandomSource):
    """Deterministic source; identical seeds and call sequences give identical bits."""

    def __init__(self, seed: int):
        super().__init__()
        self.seed = seed
        self._gen = random.Random(seed)

    def _draw(self, count: int) -> int:
        return self._gen.getrandbits(count)

    def __repr__(self):
        return f"SeededRandom(seed={self.seed}, bits_consumed={self.bits_consumed})"


class SystemRandom(RandomSource):
    """OS-entropy source (``os.urandom`` under the hood)."""

    def __init__(self):
        super().__init__()
        self._gen = random.SystemRandom()

    def _draw(self, count: int) -> int:
        return self._gen.getrandbits(count)


def random_bits(rng: RandomSource, count: int) -> Bits:
    return rng.next_bits(count)


def derive_seed(seed: int, label: str) -> int:
    """Stable per-purpose sub-seed, so independent streams don't share state."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")
