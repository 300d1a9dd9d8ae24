"""Tiny Encryption Algorithm and CBC chaining.

A *pass* is one complete 32-cycle TEA encryption; ``passes=3`` runs the
cipher three times over the block. Blocks and key words are big-endian.
"""

from __future__ import annotations

import enum
import struct

import numpy as np

from ..errors import MalformedPadding

BLOCK_SIZE = 8
KEY_SIZE = 16
CYCLES = 32
DELTA = 0x9E3779B9
MASK = 0xFFFFFFFF

# running sums for cycles 1..32
_SUMS = [(DELTA * (i + 1)) & MASK for i in range(CYCLES)]
_SUMS_REV = _SUMS[::-1]

# below this many blocks the numpy kernel costs more than it saves
_VECTOR_MIN_BLOCKS = 64


class Direction(str, enum.Enum):
    ENCRYPT = "encrypt"
    DECRYPT = "decrypt"


def _key_words(key: bytes) -> tuple[int, int, int, int]:
    if len(key) != KEY_SIZE:
        raise ValueError(f"TEA key must be {KEY_SIZE} bytes, got {len(key)}")
    return struct.unpack(">4I", key)


def _encrypt_words(v0, v1, k0, k1, k2, k3, passes):
    for _ in range(passes):
        for s in _SUMS:
            v0 = (v0 + ((((v1 << 4) + k0) ^ (v1 + s) ^ ((v1 >> 5) + k1)))) & MASK
            v1 = (v1 + ((((v0 << 4) + k2) ^ (v0 + s) ^ ((v0 >> 5) + k3)))) & MASK
    return v0, v1


def _decrypt_words(v0, v1, k0, k1, k2, k3, passes):
    for _ in range(passes):
        for s in _SUMS_REV:
            v1 = (v1 - ((((v0 << 4) + k2) ^ (v0 + s) ^ ((v0 >> 5) + k3)))) & MASK
            v0 = (v0 - ((((v1 << 4) + k0) ^ (v1 + s) ^ ((v1 >> 5) + k1)))) & MASK
    return v0, v1


def tea_block(block: bytes, key: bytes, direction: Direction | str = Direction.ENCRYPT,
              passes: int = 1) -> bytes:
    """Encrypt or decrypt one 8-byte block."""
    if passes < 1:
        raise ValueError("passes must be >= 1")
    if len(block) != BLOCK_SIZE:
        raise ValueError(f"TEA block must be {BLOCK_SIZE} bytes, got {len(block)}")
    k = _key_words(key)
    v0, v1 = struct.unpack(">2I", block)
    if Direction(direction) is Direction.ENCRYPT:
        v0, v1 = _encrypt_words(v0, v1, *k, passes)
    else:
        v0, v1 = _decrypt_words(v0, v1, *k, passes)
    return struct.pack(">2I", v0, v1)


def tea_words(v0: np.ndarray, v1: np.ndarray, key: bytes, direction: Direction | str = Direction.ENCRYPT,
              passes: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """The cipher rounds over uint32 half-block arrays, updated in place."""
    if passes < 1:
        raise ValueError("passes must be >= 1")
    k0, k1, k2, k3 = (np.uint32(w) for w in _key_words(key))
    four, five = np.uint32(4), np.uint32(5)
    if Direction(direction) is Direction.ENCRYPT:
        sums = [np.uint32(s) for s in _SUMS]
        for _ in range(passes):
            for s in sums:
                v0 += ((v1 << four) + k0) ^ (v1 + s) ^ ((v1 >> five) + k1)
                v1 += ((v0 << four) + k2) ^ (v0 + s) ^ ((v0 >> five) + k3)
    else:
        sums = [np.uint32(s) for s in _SUMS_REV]
        for _ in range(passes):
            for s in sums:
                v1 -= ((v0 << four) + k2) ^ (v0 + s) ^ ((v0 >> five) + k3)
                v0 -= ((v1 << four) + k0) ^ (v1 + s) ^ ((v1 >> five) + k1)
    return v0, v1


def split_words(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    if len(data) % BLOCK_SIZE:
        raise ValueError("data length must be a multiple of the block size")
    words = np.frombuffer(data, dtype=">u4").astype(np.uint32).reshape(-1, 2)
    return words[:, 0].copy(), words[:, 1].copy()


def tea_blocks(data: bytes, key: bytes, direction: Direction | str = Direction.ENCRYPT,
               passes: int = 1) -> bytes:
    """Apply TEA independently to every block of ``data`` (ECB), vectorized
    across blocks with numpy. ``len(data)`` must be a multiple of 8."""
    if passes < 1:
        raise ValueError("passes must be >= 1")
    v0, v1 = tea_words(*split_words(data), key, direction, passes)
    out = np.empty((len(v0), 2), dtype=">u4")
    out[:, 0] = v0
    out[:, 1] = v1
    return out.tobytes()


def pad(data: bytes) -> bytes:
    n = BLOCK_SIZE - len(data) % BLOCK_SIZE
    return data + bytes([n]) * n


def unpad(data: bytes) -> bytes:
    if not data or len(data) % BLOCK_SIZE:
        raise MalformedPadding("padded data must be a non-empty multiple of the block size")
    n = data[-1]
    if not 1 <= n <= BLOCK_SIZE or data[-n:] != bytes([n]) * n:
        raise MalformedPadding("inconsistent padding")
    return data[:-n]


def _xor(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def cbc_apply(data: bytes, key: bytes, iv: bytes, direction: Direction | str = Direction.ENCRYPT,
              passes: int = 1) -> bytes:
    """TEA in CBC mode. Encryption always appends 1-8 padding bytes."""
    if len(iv) != BLOCK_SIZE:
        raise ValueError(f"IV must be {BLOCK_SIZE} bytes, got {len(iv)}")
    if passes < 1:
        raise ValueError("passes must be >= 1")
    k = _key_words(key)
    if Direction(direction) is Direction.ENCRYPT:
        plain = pad(data)
        out = bytearray()
        p0, p1 = struct.unpack(">2I", iv)
        for i in range(0, len(plain), BLOCK_SIZE):
            b0, b1 = struct.unpack_from(">2I", plain, i)
            p0, p1 = _encrypt_words(b0 ^ p0, b1 ^ p1, *k, passes)
            out += struct.pack(">2I", p0, p1)
        return bytes(out)

    if len(data) % BLOCK_SIZE:
        raise MalformedPadding("ciphertext length is not a multiple of the block size")
    if len(data) // BLOCK_SIZE >= _VECTOR_MIN_BLOCKS:
        decrypted = tea_blocks(data, key, Direction.DECRYPT, passes)
        chain = iv + data[:-BLOCK_SIZE]
        plain = _xor(decrypted, chain)
    else:
        out = bytearray()
        p0, p1 = struct.unpack(">2I", iv)
        for i in range(0, len(data), BLOCK_SIZE):
            c0, c1 = struct.unpack_from(">2I", data, i)
            d0, d1 = _decrypt_words(c0, c1, *k, passes)
            out += struct.pack(">2I", d0 ^ p0, d1 ^ p1)
            p0, p1 = c0, c1
        plain = bytes(out)
    return unpad(plain)
