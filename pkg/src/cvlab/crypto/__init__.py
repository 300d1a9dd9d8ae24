"""Cryptographic primitives written from first principles."""

from .arith import is_probable_prime, mod_inverse, mod_pow, mod_repeated_subtraction, next_prime
from .elgamal import (ElGamalKeyPair, ElGamalPublicKey, elgamal_decrypt, elgamal_encrypt,
                      elgamal_keygen)
from .hashing import DIGEST_BITS, DIGEST_SIZE, hash512
from .rc4 import rc4_apply, rc4_keystream
from .rng import Bits, RandomSource, SeededRandom, SystemRandom, derive_seed, random_bits
from .rsa import (RsaKeyPair, RsaPublicKey, digest_as_int, rsa_decrypt, rsa_encrypt,
                  rsa_keygen, rsa_sign, rsa_verify)
from .tea import BLOCK_SIZE, KEY_SIZE, Direction, cbc_apply, split_words, tea_block, tea_blocks, tea_words

__all__ = [
    "BLOCK_SIZE", "Bits", "DIGEST_BITS", "DIGEST_SIZE", "Direction", "ElGamalKeyPair",
    "ElGamalPublicKey", "KEY_SIZE", "RandomSource", "RsaKeyPair", "RsaPublicKey",
    "SeededRandom", "SystemRandom", "cbc_apply", "derive_seed", "digest_as_int",
    "elgamal_decrypt", "elgamal_encrypt", "elgamal_keygen", "hash512", "is_probable_prime",
    "mod_inverse", "mod_pow", "mod_repeated_subtraction", "next_prime", "random_bits",
    "rc4_apply", "rc4_keystream", "rsa_decrypt", "rsa_encrypt", "rsa_keygen", "rsa_sign",
    "rsa_verify", "split_words", "tea_block", "tea_blocks", "tea_words",
]
