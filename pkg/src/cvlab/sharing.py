"""Threshold (Shamir) sharing of the author's private exponent across hosts.

Once the exponent is split, no single machine and nobody at the author's end
holds it; release requires collecting ``k`` shares over the network and
interpolating at zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .crypto import BLOCK_SIZE, RsaKeyPair, SeededRandom, derive_seed, next_prime, rsa_decrypt, rsa_keygen
from .crypto.rng import RandomSource
from .detect import DetectorConfig, Privilege, scan_host
from .errors import DuplicateIndex, InsufficientShares, InvalidThreshold
from .extortion import (DEFAULT_DEMAND, NOTE_PATH, PaymentMessage, RansomNote, Release,
                        decode_key_material, infect_all, victim_restore)
from .hostsim import ATTACKER, SimNetwork
from .report import ScenarioReport

SHARE_SLOT = "virus.share"
RECON_SLOT = "virus.recon"


@dataclass(frozen=True)
class KeyShare:
    index: int
    value: int
    field_prime: int
    threshold: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("share index must be >= 1")
        if not 0 <= self.value < self.field_prime:
            raise ValueError("share value outside the field")

    def to_bytes(self) -> bytes:
        return json.dumps({"i": self.index, "v": format(self.value, "x"), "p": format(self.field_prime, "x"),
                           "k": self.threshold}, sort_keys=True).encode()

    @classmethod
    def from_bytes(cls, data: bytes) -> "KeyShare":
        doc = json.loads(data)
        return cls(doc["i"], int(doc["v"], 16), int(doc["p"], 16), doc["k"])


@dataclass
class SharingDeployment:
    threshold: int
    total: int
    field_prime: int
    placements: dict[int, KeyShare] = field(default_factory=dict)


def evaluate_polynomial(coefficients: list[int], x: int, p: int) -> int:
    """Horner evaluation; ``coefficients[0]`` is the constant term."""
    acc = 0
    for c in reversed(coefficients):
        acc = (acc * x + c) % p
    return acc


def make_shares(coefficients: list[int], n: int, p: int) -> list[KeyShare]:
    k = len(coefficients)
    return [KeyShare(i, evaluate_polynomial(coefficients, i, p), p, k) for i in range(1, n + 1)]


def split_secret(secret: int, k: int, n: int, rng: RandomSource, prime: int | None = None) -> tuple[int, list[KeyShare]]:
    """Shamir ``k``-of-``n`` sharing over GF(p).

    ``p`` defaults to the smallest prime above ``max(secret, n)``.
    """
    if not 1 <= k <= n:
        raise InvalidThreshold(f"need 1 <= k <= n, got k={k}, n={n}")
    if secret < 0:
        raise ValueError("secret must be non-negative")
    p = prime if prime is not None else next_prime(max(secret, n))
    if p <= secret or p <= n:
        raise ValueError("field prime must exceed both the secret and n")
    coefficients = [secret] + [rng.randbelow(p) for _ in range(k - 1)]
    return p, make_shares(coefficients, n, p)


def reconstruct(shares: list[KeyShare], field_prime: int | None = None) -> int:
    """Lagrange interpolation at x = 0."""
    if not shares:
        raise InsufficientShares("no shares supplied")
    p = field_prime if field_prime is not None else shares[0].field_prime
    k = shares[0].threshold
    indices = [s.index for s in shares]
    if len(set(indices)) != len(indices):
        raise DuplicateIndex("share indices must be distinct")
    if len(shares) < k:
        raise InsufficientShares(f"{len(shares)} shares, threshold is {k}")
    secret = 0
    for s in shares:
        num = den = 1
        for t in shares:
            if t.index != s.index:
                num = num * -t.index % p
                den = den * (s.index - t.index) % p
        secret = (secret + s.value * num * pow(den, -1, p)) % p
    return secret


def int_representations(value: int) -> list[bytes]:
    """Ways an integer might sit in serialized state: raw bytes, hex, decimal."""
    raw = value.to_bytes(max(1, (value.bit_length() + 7) // 8), "big")
    return [raw, format(value, "x").encode(), format(value, "X").encode(), str(value).encode()]


def host_holds(host, value: int) -> bool:
    image = host.raw_image()
    return any(rep in image for rep in int_representations(value))


@dataclass(frozen=True)
class SharingConfig:
    k: int = 3
    n: int = 5
    seed: int = 0
    bits: int = 512
    passes: int = 1
    demand: int = DEFAULT_DEMAND
    cleanup: tuple[int, ...] = ()
    coordinator: int = 0
    virus_privilege: Privilege = Privilege.USER
    detector: DetectorConfig = field(default_factory=DetectorConfig)


def deploy(network: SimNetwork, pair: RsaKeyPair, k: int, n: int, rng: RandomSource) -> SharingDeployment:
    """Split ``pair.d`` over hosts ``0..n-1``, one share in each host's memory."""
    if n > len(network.hosts):
        raise InvalidThreshold(f"n={n} exceeds the {len(network.hosts)} hosts available")
    p, shares = split_secret(pair.d, k, n, rng)
    deployment = SharingDeployment(k, n, p)
    for host, share in zip(network.hosts, shares):
        host.memory[SHARE_SLOT] = bytearray(share.to_bytes())
        deployment.placements[host.host_id] = share
    return deployment


def run_sharing_scenario(network: SimNetwork, config: SharingConfig) -> ScenarioReport:
    """Extortion where the private exponent lives only as shares on victims.

    The victim pays the ransom and nothing else. The author answers with a
    release signal; the coordinator's virus instance asks every host for its
    share, interpolates once ``k`` have arrived, unwraps each host's key
    material and sends it back, then wipes the exponent.
    """
    report = ScenarioReport("sharing")
    if config.k < 2:
        raise InvalidThreshold("k must be >= 2; with k = 1 every share equals the secret")
    rng = SeededRandom(derive_seed(config.seed, "attacker"))
    pair = rsa_keygen(config.bits, rng)
    pub, d = pair.public_key, pair.d
    deployment = deploy(network, pair, config.k, config.n, rng)
    del pair
    report.step("deploy", k=config.k, n=config.n, field_prime_bits=deployment.field_prime.bit_length(),
                placements=sorted(deployment.placements))
    report.verdicts["exponent_absent_after_deploy"] = not any(host_holds(h, d) for h in network.hosts)

    originals = {h.host_id: dict(h.files) for h in network.hosts}
    receipts = infect_all(network, pub, config.seed, report, passes=config.passes,
                          demand=config.demand, privilege=config.virus_privilege)
    for host in network.hosts:
        report.alerts.extend(a.to_dict() for a in scan_host(host, config.detector))
    if report.outcome == "policy_blocked":
        report.finish(network)
        return report

    for host_id in config.cleanup:
        network.host(host_id).memory.pop(SHARE_SLOT, None)
        report.step("cleanup", host=host_id)

    for host_id in receipts:
        payment = PaymentMessage(host_id, (), config.demand)
        network.send(host_id, ATTACKER, payment.to_bytes(), "payment")
        report.step("pay", host=host_id, amount=config.demand)
    paid = [PaymentMessage.from_bytes(m.payload) for m in network.deliver_all()]
    paid = [p for p in paid if p.amount >= config.demand]
    if paid:
        network.send(ATTACKER, config.coordinator, json.dumps([p.host_id for p in paid]).encode(), "release-signal")
    signals = [m for m in network.deliver_all() if m.kind == "release-signal"]
    if not signals:
        report.outcome = "protocol_failure"
        report.finish(network)
        return report
    to_release = json.loads(signals[0].payload)

    coordinator = network.host(config.coordinator)
    for host in network.hosts:
        if host.host_id != coordinator.host_id:
            network.send(coordinator.host_id, host.host_id, b"", "share-request")
    for msg in network.deliver_all():
        slot = network.host(msg.receiver).memory.get(SHARE_SLOT)
        if slot is not None:
            network.send(msg.receiver, coordinator.host_id, bytes(slot), "share")
    collected = [KeyShare.from_bytes(m.payload) for m in network.deliver_all() if m.kind == "share"]
    if SHARE_SLOT in coordinator.memory:
        collected.append(KeyShare.from_bytes(bytes(coordinator.memory[SHARE_SLOT])))
    collected.sort(key=lambda s: s.index)

    try:
        recovered = reconstruct(collected, deployment.field_prime)
    except InsufficientShares as exc:
        report.step("reconstruct", shares=len(collected), ok=False, error=f"{type(exc).__name__}: {exc}")
        report.verdicts["restored"] = False
        report.outcome = "protocol_failure"
        report.finish(network)
        return report
    report.step("reconstruct", shares=len(collected), ok=recovered == d)

    scratch = coordinator.memory[RECON_SLOT] = bytearray(recovered.to_bytes((recovered.bit_length() + 7) // 8, "big"))
    for host_id in to_release:
        network.send(host_id, coordinator.host_id, network.host(host_id).files[NOTE_PATH], "note")
    transient = RsaKeyPair(pub.n, pub.e, recovered, pub.bit_length)
    for msg in network.deliver_all():
        note = RansomNote.from_bytes(msg.payload)
        values = tuple(rsa_decrypt(c, transient) for c in note.asym_ciphertext)
        material = decode_key_material(values, pub)
        network.send(coordinator.host_id, msg.sender,
                     Release(material[BLOCK_SIZE:], material[:BLOCK_SIZE]).to_bytes(), "release")
        report.step("release", host=msg.sender)
    scratch[:] = bytes(len(scratch))
    del coordinator.memory[RECON_SLOT], recovered, transient

    restored_all = True
    for msg in network.deliver_all():
        release = Release.from_bytes(msg.payload)
        host = network.host(msg.receiver)
        count = victim_restore(host, release.key, release.iv, passes=config.passes)
        exact = host.files == originals[host.host_id]
        restored_all &= exact and count == len(receipts[host.host_id].encrypted_paths)
        report.step("restore", host=host.host_id, files=count, bit_exact=exact)

    report.verdicts["restored"] = restored_all
    report.verdicts["exponent_absent_after_release"] = not any(host_holds(h, d) for h in network.hosts)
    report.outcome = "success" if restored_all else "protocol_failure"
    report.finish(network)
    return report
