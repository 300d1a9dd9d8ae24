"""RC4 stream cipher (KSA + PRGA)."""

from __future__ import annotations

from ..errors import EmptyKey


def rc4_keystream(key: bytes, length: int) -> bytes:
    if not key:
        raise EmptyKey("RC4 key must be non-empty")
    if len(key) > 256:
        raise ValueError("RC4 key is at most 256 bytes")
    s = list(range(256))
    j = 0
    klen = len(key)
    for i in range(256):
        j = (j + s[i] + key[i % klen]) & 0xFF
        s[i], s[j] = s[j], s[i]
    out = bytearray(length)
    i = j = 0
    for n in range(length):
        i = (i + 1) & 0xFF
        si = s[i]
        j = (j + si) & 0xFF
        sj = s[j]
        s[i], s[j] = sj, si
        out[n] = s[(si + sj) & 0xFF]
    return bytes(out)


def rc4_apply(data: bytes, key: bytes) -> bytes:
    """XOR ``data`` with the RC4 keystream for ``key``. Self-inverse."""
    stream = rc4_keystream(key, len(data))
    if not data:
        return b""
    x = int.from_bytes(data, "big") ^ int.from_bytes(stream, "big")
    return x.to_bytes(len(data), "big")
