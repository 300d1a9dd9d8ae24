"""512-bit digest used by the signed-update pipeline (SHA-512)."""

import hashlib

DIGEST_BITS = 512
DIGEST_SIZE = DIGEST_BITS // 8


def hash512(data: bytes) -> bytes:
    return hashlib.sha512(data).digest()
