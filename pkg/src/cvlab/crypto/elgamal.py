"""ElGamal over the multiplicative group of a prime field."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import MessageOutOfRange
from .arith import is_probable_prime, mod_inverse, mod_pow
from .rng import RandomSource


@dataclass(frozen=True)
class ElGamalPublicKey:
    p: int
    g: int
    y: int


@dataclass(frozen=True, repr=False)
class ElGamalKeyPair:
    p: int
    g: int
    x: int
    y: int

    @classmethod
    def from_private(cls, p: int, g: int, x: int) -> "ElGamalKeyPair":
        return cls(p, g, x, mod_pow(g, x, p))

    @property
    def public_key(self) -> ElGamalPublicKey:
        return ElGamalPublicKey(self.p, self.g, self.y)

    def __repr__(self):
        return f"ElGamalKeyPair(p={self.p}, g={self.g}, y={self.y}, x=<hidden>)"


def elgamal_keygen(bits: int, rng: RandomSource) -> ElGamalKeyPair:
    """Safe prime ``p = 2q + 1`` of ``bits`` bits and a generator of Z_p^*."""
    if bits < 8:
        raise ValueError("bits must be >= 8")
    while True:
        q = rng.next_bits(bits - 1).value | (1 << (bits - 2)) | 1
        if is_probable_prime(q) and is_probable_prime(2 * q + 1):
            p = 2 * q + 1
            break
    while True:
        g = 2 + rng.randbelow(p - 3)
        if mod_pow(g, 2, p) != 1 and mod_pow(g, q, p) != 1:
            break
    x = 1 + rng.randbelow(p - 2)
    return ElGamalKeyPair.from_private(p, g, x)


def elgamal_encrypt(m: int, pub: ElGamalPublicKey, rng: RandomSource | None = None,
                    k: int | None = None) -> tuple[int, int]:
    """Encrypt with a fresh ephemeral exponent drawn from ``rng`` (or ``k`` if given)."""
    p = pub.p
    if not 1 <= m < p:
        raise MessageOutOfRange("message must lie in [1, p)")
    if k is None:
        if rng is None:
            raise ValueError("need rng or an explicit ephemeral k")
        k = 1 + rng.randbelow(p - 2)
    return mod_pow(pub.g, k, p), m * mod_pow(pub.y, k, p) % p


def elgamal_decrypt(ciphertext: tuple[int, int], pair: ElGamalKeyPair) -> int:
    c1, c2 = ciphertext
    p = pair.p
    if not (0 < c1 < p and 0 < c2 < p):
        raise MessageOutOfRange("ciphertext component outside the group")
    shared = mod_pow(c1, pair.x, p)
    return c2 * mod_inverse(shared, p) % p
