"""The oracles themselves, checked against published test vectors."""

from __future__ import annotations

import pytest

from oracles import (discrete_log_ref, entropy_ref, factor_ref, is_prime_ref, lagrange_at_zero_ref,
                     pow_ref, rc4_crypt_ref, rsa_private_ref, tea_bytes_ref)


def test_tea_oracle_zero_vector():
    # widely published: TEA(key=0, block=0)
    assert tea_bytes_ref(bytes(8), bytes(16)).hex() == "41ea3a0a94baa940"


def test_tea_oracle_inverts():
    key = bytes(range(16))
    block = bytes.fromhex("0123456789abcdef")
    assert tea_bytes_ref(tea_bytes_ref(block, key, 3), key, 3, decrypt=True) == block


@pytest.mark.parametrize("key, plaintext, expected", [
    (b"Key", b"Plaintext", "bbf316e8d940af0ad3"),
    (b"Wiki", b"pedia", "1021bf0420"),
    (b"Secret", b"Attack at dawn", "45a01f645fc35b383552544b9bf5"),
])
def test_rc4_oracle_published_vectors(key, plaintext, expected):
    assert rc4_crypt_ref(plaintext, key).hex() == expected


def test_number_theory_oracles():
    assert [n for n in range(30) if is_prime_ref(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert pow_ref(2, 3, 33) == 8 and pow_ref(8, 7, 33) == 2
    assert factor_ref(33) == (3, 11)
    assert rsa_private_ref(33, 3) == 7
    assert discrete_log_ref(5, 8, 23) == 6


def test_lagrange_oracle_and_entropy_oracle():
    assert lagrange_at_zero_ref([(1, 1), (2, 4)], 7) == 5
    assert entropy_ref(bytes(range(256))) == pytest.approx(8.0)
    assert entropy_ref(b"aaaa") == 0.0
