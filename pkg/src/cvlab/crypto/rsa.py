"""Textbook RSA: key generation, raw encryption and raw signatures."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DigestTooLarge, MessageOutOfRange
from .arith import MR_ROUNDS, is_probable_prime, mod_inverse, mod_pow
from .hashing import DIGEST_BITS
from .rng import RandomSource

DEFAULT_BITS = 512
PUBLIC_EXPONENT = 65537
# signing below this modulus size truncates the digest
TRUNCATION_LIMIT = 520


@dataclass(frozen=True)
class RsaPublicKey:
    n: int
    e: int

    @property
    def bit_length(self) -> int:
        return self.n.bit_length()

    @property
    def byte_length(self) -> int:
        return (self.n.bit_length() + 7) // 8


@dataclass(frozen=True, repr=False)
class RsaKeyPair:
    n: int
    e: int
    d: int
    bit_length: int

    @property
    def public_key(self) -> RsaPublicKey:
        return RsaPublicKey(self.n, self.e)

    def __repr__(self):
        return f"RsaKeyPair(bits={self.bit_length}, n=0x{self.n:x}, e={self.e}, d=<hidden>)"


def _random_prime(bits: int, rng: RandomSource) -> int:
    """Random ``bits``-bit prime with the top two bits set, found by stepping
    upward from a random odd start."""
    top = (1 << (bits - 1)) | (1 << (bits - 2))
    limit = 1 << bits
    while True:
        candidate = rng.next_bits(bits).value | top | 1
        while candidate < limit:
            if is_probable_prime(candidate, MR_ROUNDS, rng):
                return candidate
            candidate += 2


def rsa_keygen(bit_length: int = DEFAULT_BITS, rng: RandomSource | None = None,
               e: int = PUBLIC_EXPONENT) -> RsaKeyPair:
    """Generate a key pair whose modulus has exactly ``bit_length`` bits."""
    if rng is None:
        raise ValueError("rsa_keygen needs a RandomSource")
    if bit_length < 16 or bit_length % 2:
        raise ValueError("bit_length must be even and >= 16")
    half = bit_length // 2
    while True:
        p = _random_prime(half, rng)
        q = _random_prime(half, rng)
        if p == q:
            continue
        lam = (p - 1) * (q - 1) // math.gcd(p - 1, q - 1)
        if math.gcd(e, lam) != 1:
            continue
        n = p * q
        return RsaKeyPair(n=n, e=e, d=mod_inverse(e, lam), bit_length=n.bit_length())


def rsa_encrypt(m: int, pub: RsaPublicKey) -> int:
    if not 0 <= m < pub.n:
        raise MessageOutOfRange("message must lie in [0, n)")
    return mod_pow(m, pub.e, pub.n)


def rsa_decrypt(c: int, pair: RsaKeyPair) -> int:
    if not 0 <= c < pair.n:
        raise MessageOutOfRange("ciphertext must lie in [0, n)")
    return mod_pow(c, pair.d, pair.n)


def digest_as_int(digest: bytes | int, modulus_bits: int, truncate: bool = True) -> tuple[int, bool]:
    """Integer form of a digest for signing under a ``modulus_bits`` key.

    Moduli under 520 bits keep only the top ``modulus_bits - 8`` digest bits.
    Returns ``(value, truncated)``.
    """
    value = digest if isinstance(digest, int) else int.from_bytes(digest, "big")
    if truncate and modulus_bits < TRUNCATION_LIMIT:
        keep = modulus_bits - 8
        return value >> (DIGEST_BITS - keep), True
    return value, False


def rsa_sign(digest: bytes | int, pair: RsaKeyPair, truncate: bool = True) -> int:
    value, _ = digest_as_int(digest, pair.bit_length, truncate)
    if value >= pair.n:
        raise DigestTooLarge("digest does not fit under the modulus")
    return mod_pow(value, pair.d, pair.n)


def rsa_verify(sig: int, pub: RsaPublicKey) -> int:
    """Recover the (possibly truncated) digest value from a signature."""
    if not 0 <= sig < pub.n:
        raise MessageOutOfRange("signature must lie in [0, n)")
    return mod_pow(sig, pub.e, pub.n)
