from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvlab.crypto import (ElGamalKeyPair, RsaKeyPair, RsaPublicKey, SeededRandom, digest_as_int,
                          elgamal_decrypt, elgamal_encrypt, elgamal_keygen, hash512,
                          is_probable_prime, rsa_decrypt, rsa_encrypt, rsa_keygen, rsa_sign,
                          rsa_verify)
from cvlab.errors import DigestTooLarge, MessageOutOfRange
from oracles import factor_ref, is_prime_ref, pow_ref, rsa_private_ref

TOY = RsaKeyPair(n=33, e=3, d=7, bit_length=6)


def test_rsa_hand_example():
    assert rsa_encrypt(2, TOY.public_key) == 8
    assert rsa_decrypt(8, TOY) == 2


def test_rsa_fixed_points_and_range():
    assert rsa_encrypt(0, TOY.public_key) == 0
    assert rsa_encrypt(1, TOY.public_key) == 1
    with pytest.raises(MessageOutOfRange):
        rsa_encrypt(33, TOY.public_key)
    with pytest.raises(MessageOutOfRange):
        rsa_decrypt(-1, TOY)


def test_rsa_toy_exhaustive_against_brute_force():
    pub = TOY.public_key
    for m in range(33):
        assert rsa_encrypt(m, pub) == pow_ref(m, 3, 33)
        assert rsa_decrypt(rsa_encrypt(m, pub), TOY) == m


@pytest.mark.parametrize("bits", [16, 24, 32])
def test_small_keygen_agrees_with_factoring_oracle(bits):
    pair = rsa_keygen(bits, SeededRandom(bits))
    p, q = factor_ref(pair.n)
    assert p != q and is_prime_ref(p) and is_prime_ref(q)
    assert pair.n.bit_length() == bits
    assert pair.d == rsa_private_ref(pair.n, pair.e)


def test_rsa_512_bit_length_and_correctness():
    rng = SeededRandom(5)
    pair = rsa_keygen(512, rng)
    assert pair.n.bit_length() == 512 and pair.bit_length == 512
    for _ in range(100):
        m = rng.randbelow(pair.n)
        assert rsa_decrypt(rsa_encrypt(m, pair.public_key), pair) == m


def test_rsa_keygen_is_deterministic_under_seed():
    assert rsa_keygen(128, SeededRandom(9)) == rsa_keygen(128, SeededRandom(9))
    assert rsa_keygen(128, SeededRandom(9)).n != rsa_keygen(128, SeededRandom(10)).n


def test_rsa_keygen_rejects_bad_sizes():
    for bits in (15, 17, 8):
        with pytest.raises(ValueError):
            rsa_keygen(bits, SeededRandom(0))


def test_rsa_repr_hides_private_exponent():
    pair = rsa_keygen(64, SeededRandom(1))
    assert str(pair.d) not in repr(pair)


@given(st.integers(0, 2**32))
@settings(max_examples=20)
def test_rsa_identity_property(seed):
    pair = rsa_keygen(64, SeededRandom(seed))
    m = seed % pair.n
    assert rsa_decrypt(rsa_encrypt(m, pair.public_key), pair) == m


def test_sign_verify_round_trip_full_width():
    pair = rsa_keygen(1024, SeededRandom(3))
    h = hash512(b"payload")
    sig = rsa_sign(h, pair)
    assert rsa_verify(sig, pair.public_key) == int.from_bytes(h, "big")


def test_sign_verify_truncated_toy():
    pair = rsa_keygen(64, SeededRandom(4))
    h = hash512(b"payload")
    value, truncated = digest_as_int(h, 64)
    assert truncated and value == int.from_bytes(h, "big") >> (512 - 56)
    assert rsa_verify(rsa_sign(h, pair), pair.public_key) == value


def test_digest_too_large_without_truncation():
    pair = rsa_keygen(64, SeededRandom(4))
    with pytest.raises(DigestTooLarge):
        rsa_sign(hash512(b"x"), pair, truncate=False)
    with pytest.raises(DigestTooLarge):
        rsa_sign(pair.n, pair, truncate=False)


def test_verify_under_other_key_differs():
    rng = SeededRandom(6)
    hits = 0
    for _ in range(100):
        a, b = rsa_keygen(64, rng), rsa_keygen(64, rng)
        h = hash512(rng.random_bytes(16))
        sig = rsa_sign(h, a)
        if sig < b.n and rsa_verify(sig, b.public_key) == digest_as_int(h, 64)[0]:
            hits += 1
    assert hits == 0


def test_public_key_properties():
    pub = RsaPublicKey(n=(1 << 511) + 1, e=65537)
    assert pub.bit_length == 512 and pub.byte_length == 64


# -- ElGamal -----------------------------------------------------------------

TOY_EG = ElGamalKeyPair.from_private(23, 5, 6)


def test_elgamal_hand_example():
    assert TOY_EG.y == 8
    assert elgamal_encrypt(10, TOY_EG.public_key, k=3) == (10, 14)
    assert elgamal_decrypt((10, 14), TOY_EG) == 10


def test_elgamal_toy_field_exhaustive():
    for m in range(1, 23):
        for k in range(1, 22):
            c1, c2 = elgamal_encrypt(m, TOY_EG.public_key, k=k)
            assert (c1, c2) == (pow_ref(5, k, 23), m * pow_ref(8, k, 23) % 23)
            assert elgamal_decrypt((c1, c2), TOY_EG) == m


def test_elgamal_range_checks():
    with pytest.raises(MessageOutOfRange):
        elgamal_encrypt(0, TOY_EG.public_key, k=2)
    with pytest.raises(MessageOutOfRange):
        elgamal_encrypt(23, TOY_EG.public_key, k=2)
    with pytest.raises(MessageOutOfRange):
        elgamal_decrypt((0, 5), TOY_EG)


def test_elgamal_fresh_ephemerals():
    pair = elgamal_keygen(64, SeededRandom(1))
    rng = SeededRandom(2)
    cts = {elgamal_encrypt(42, pair.public_key, rng) for _ in range(100)}
    assert len(cts) == 100
    assert all(elgamal_decrypt(c, pair) == 42 for c in cts)


def test_elgamal_keygen_safe_prime():
    pair = elgamal_keygen(32, SeededRandom(7))
    assert is_probable_prime(pair.p) and is_probable_prime((pair.p - 1) // 2)
    assert pow(pair.g, pair.x, pair.p) == pair.y
    assert 1 <= pair.x <= pair.p - 2


@given(st.integers(1, 2**40), st.integers(0, 2**32))
@settings(max_examples=30)
def test_elgamal_round_trip_property(m, seed):
    pair = elgamal_keygen(48, SeededRandom(seed))
    m = m % (pair.p - 1) + 1
    assert elgamal_decrypt(elgamal_encrypt(m, pair.public_key, SeededRandom(seed + 1)), pair) == m
