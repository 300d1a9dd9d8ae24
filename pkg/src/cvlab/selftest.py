"""Quick in-package invariant checks, runnable without the test suite."""

from __future__ import annotations

import itertools
from collections.abc import Callable
from dataclasses import dataclass

from .conficker import (SUFFIXES_A, ConfickerConfig, DgaConfig, flip_bit, generate_domains,
                        package_binary, run_conficker_scenario, validate_and_unpack)
from .crypto import (Direction, ElGamalKeyPair, SeededRandom, cbc_apply, elgamal_decrypt,
                     elgamal_encrypt, mod_repeated_subtraction, rc4_apply, rsa_decrypt, rsa_encrypt,
                     rsa_keygen, tea_block, tea_blocks)
from .detect import STRICT, DetectorConfig, mass_encryption_detector
from .dps import DpsConfig, run_dps_scenario
from .errors import SignatureMismatch
from .extortion import ExtortionConfig, attacker_setup, run_extortion_scenario
from .hostsim import create_network
from .sharing import SharingConfig, reconstruct, run_sharing_scenario, split_secret


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _tea_inverse() -> bool:
    rng = SeededRandom(1)
    for _ in range(20):
        block, key = rng.random_bytes(8), rng.random_bytes(16)
        if tea_block(tea_block(block, key, Direction.ENCRYPT, 3), key, Direction.DECRYPT, 3) != block:
            return False
    data, key = rng.random_bytes(8 * 64), rng.random_bytes(16)
    scalar = b"".join(tea_block(data[i:i + 8], key, Direction.ENCRYPT, 2) for i in range(0, len(data), 8))
    return tea_blocks(data, key, Direction.ENCRYPT, 2) == scalar


def _cbc_round_trip() -> bool:
    rng = SeededRandom(2)
    key, iv = rng.random_bytes(16), rng.random_bytes(8)
    return all(cbc_apply(cbc_apply(d, key, iv, Direction.ENCRYPT), key, iv, Direction.DECRYPT) == d
               for d in (rng.random_bytes(n) for n in (0, 1, 7, 8, 9, 1000)))


def _rc4_involution() -> bool:
    rng = SeededRandom(3)
    data, key = rng.random_bytes(500), rng.random_bytes(13)
    return rc4_apply(rc4_apply(data, key), key) == data and rc4_apply(b"", key) == b""


def _rsa_identity() -> bool:
    rng = SeededRandom(4)
    pair = rsa_keygen(512, rng)
    return pair.n.bit_length() == 512 and all(
        rsa_decrypt(rsa_encrypt(m, pair.public_key), pair) == m for m in (rng.randbelow(pair.n) for _ in range(20)))


def _elgamal_toy() -> bool:
    pair = ElGamalKeyPair.from_private(23, 5, 6)
    return (elgamal_encrypt(10, pair.public_key, k=3) == (10, 14)
            and all(elgamal_decrypt(elgamal_encrypt(m, pair.public_key, SeededRandom(m)), pair) == m
                    for m in range(1, 23)))


def _repeated_subtraction() -> bool:
    return all(mod_repeated_subtraction(a, m) == a % m for a in range(0, 2000, 7) for m in range(1, 60))


def _shamir() -> bool:
    p, shares = split_secret(1234, 3, 5, SeededRandom(5))
    return all(reconstruct(list(c), p) == 1234 for c in itertools.combinations(shares, 3))


def _extortion() -> bool:
    ok = run_extortion_scenario(create_network(2, 4, 6), ExtortionConfig(seed=6, bits=128)).success
    blocked = run_extortion_scenario(create_network(1, 4, 6, policy=STRICT), ExtortionConfig(seed=6, bits=128))
    return ok and blocked.outcome == "policy_blocked" and blocked.verdicts["files_unmodified"]


def _sharing() -> bool:
    return run_sharing_scenario(create_network(4, 2, 7), SharingConfig(k=2, n=4, seed=7, bits=128)).success


def _dps() -> bool:
    return run_dps_scenario(create_network(2, 0, 8), DpsConfig(seed=8, group_bits=32)).success


def _conficker() -> bool:
    vault, pub = attacker_setup(128, SeededRandom(9))
    payload = SeededRandom(10).random_bytes(300)
    wire = package_binary(payload, vault).to_bytes()
    if validate_and_unpack(wire, pub) != payload:
        return False
    for pos in range(32, 32 + 8 * len(payload), 97):
        try:
            validate_and_unpack(flip_bit(wire, pos), pub)
            return False
        except SignatureMismatch:
            pass
    report = run_conficker_scenario(create_network(3, 0, 11), ConfickerConfig(seed=11, bits=128, tamper=(1,)))
    return report.success


def _dga() -> bool:
    domains = generate_domains(DgaConfig("A", 12), 500)
    return (all("." + d.rsplit(".", 1)[1] in SUFFIXES_A for d in domains)
            and domains == generate_domains(DgaConfig("A", 12), 500))


def _detector_edge() -> bool:
    net = create_network(1, 0, 13)
    host = net.hosts[0]
    host.write_file("a", b"x")
    host.write_file("a", bytes(range(256)))
    alerts = mass_encryption_detector(host.file_events, DetectorConfig(threshold=1))
    return len(alerts) == 1 and alerts[0].evidence == (host.file_events[-1].seq,)


CHECKS: tuple[tuple[str, Callable[[], bool]], ...] = (
    ("tea_inverse", _tea_inverse),
    ("cbc_round_trip", _cbc_round_trip),
    ("rc4_involution", _rc4_involution),
    ("rsa_identity", _rsa_identity),
    ("elgamal_toy_field", _elgamal_toy),
    ("repeated_subtraction", _repeated_subtraction),
    ("shamir_subsets", _shamir),
    ("extortion_protocol", _extortion),
    ("sharing_protocol", _sharing),
    ("dps_protocol", _dps),
    ("conficker_pipeline", _conficker),
    ("dga_suffixes", _dga),
    ("detector_threshold_edge", _detector_edge),
)


def run_selftest() -> list[CheckResult]:
    results = []
    for name, check in CHECKS:
        try:
            results.append(CheckResult(name, bool(check())))
        except Exception as exc:  # a crashing check is a failed check
            results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
    return results
