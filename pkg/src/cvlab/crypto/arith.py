"""Multi-precision helpers: modular exponentiation, primality, the
repeated-subtraction remainder."""

from __future__ import annotations

from ..errors import ZeroModulus
from .rng import RandomSource

SMALL_PRIMES = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151,
    157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233,
    239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311, 313, 317,
    331, 337, 347, 349, 353, 359, 367, 373, 379, 383, 389, 397, 401, 409, 419,
    421, 431, 433, 439, 443, 449, 457, 461, 463, 467, 479, 487, 491, 499, 503,
]

MR_ROUNDS = 40


def mod_pow(base: int, exponent: int, modulus: int) -> int:
    """Left-to-right binary square-and-multiply."""
    if modulus < 1:
        raise ZeroModulus("modulus must be positive")
    if exponent < 0:
        raise ValueError("negative exponent")
    result = 1 % modulus
    base %= modulus
    for bit in bin(exponent)[2:]:
        result = result * result % modulus
        if bit == "1":
            result = result * base % modulus
    return result


def mod_repeated_subtraction(a: int, m: int) -> int:
    """``a mod m`` by subtracting ``m`` until the remainder drops below it.

    Linear in ``a // m``; only sensible for small operands.
    """
    if m == 0:
        raise ZeroModulus("modulus must be non-zero")
    if a < 0 or m < 0:
        raise ValueError("operands must be non-negative")
    while a >= m:
        a -= m
    return a


def mod_inverse(a: int, m: int) -> int:
    """Inverse of ``a`` modulo ``m`` via the extended Euclidean algorithm."""
    old_r, r = a % m, m
    old_s, s = 1, 0
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    if old_r != 1:
        raise ValueError(f"{a} is not invertible modulo {m}")
    return old_s % m


def is_probable_prime(n: int, rounds: int = MR_ROUNDS, rng: RandomSource | None = None) -> bool:
    """Miller-Rabin. Witnesses come from ``rng`` when given, otherwise the
    first ``rounds`` primes are used as fixed bases."""
    if n < 2:
        return False
    for p in SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for i in range(rounds):
        if rng is not None:
            a = 2 + rng.randbelow(n - 3)
        else:
            a = SMALL_PRIMES[i % len(SMALL_PRIMES)]
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than ``n``."""
    candidate = max(n + 1, 2)
    if candidate > 2 and candidate % 2 == 0:
        candidate += 1
    while not is_probable_prime(candidate):
        candidate += 1 if candidate == 2 else 2
    return candidate
