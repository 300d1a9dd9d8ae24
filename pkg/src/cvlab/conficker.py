"""Signed binary updates and rendezvous-domain generation.

Packaging: ``M = hash512(payload)``, RC4-encrypt the payload under ``M``,
sign ``M`` with the author's RSA key and append the signature. Clients
recover ``M`` from the signature, decrypt, and accept only if the plaintext
hashes back to ``M``. Under moduli smaller than 520 bits the top
``bits - 8`` digest bits stand in for ``M`` on both sides.

Wire format (big-endian)::

    u32 payload length | enc | u16 signature length | signature | u8 flags

Flag bit 0 marks a truncated digest.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

from .crypto import RsaPublicKey, SeededRandom, derive_seed, digest_as_int, hash512, rc4_apply, rsa_verify
from .crypto.rng import RandomSource
from .detect import Privilege
from .errors import EmptyPayload, MessageOutOfRange, PackageFormatError, SignatureMismatch
from .extortion import KeyVault, attacker_setup
from .hostsim import ATTACKER, SimHost, SimNetwork
from .report import ScenarioReport

FLAG_TRUNCATED = 0x01

SUFFIXES_A = (".com", ".net", ".org", ".info", ".biz")
SUFFIXES_B = SUFFIXES_A + (".ws", ".cn", ".cc")
PORT_RANGE = (1024, 10000)
_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class SignedPackage:
    enc: bytes
    sig: int
    sig_length: int
    truncated: bool

    def to_bytes(self) -> bytes:
        flags = FLAG_TRUNCATED if self.truncated else 0
        return (struct.pack(">I", len(self.enc)) + self.enc + struct.pack(">H", self.sig_length)
                + self.sig.to_bytes(self.sig_length, "big") + bytes([flags]))

    @classmethod
    def from_bytes(cls, data: bytes) -> "SignedPackage":
        if len(data) < 7:
            raise PackageFormatError("package too short")
        (length,) = struct.unpack_from(">I", data, 0)
        if 4 + length + 2 > len(data):
            raise PackageFormatError("payload length exceeds package")
        enc = data[4:4 + length]
        (sig_length,) = struct.unpack_from(">H", data, 4 + length)
        rest = data[6 + length:]
        if len(rest) != sig_length + 1:
            raise PackageFormatError("signature length does not match package")
        flags = rest[-1]
        if flags & ~FLAG_TRUNCATED:
            raise PackageFormatError(f"unknown header flags 0x{flags:02x}")
        return cls(enc, int.from_bytes(rest[:-1], "big"), sig_length, bool(flags & FLAG_TRUNCATED))


def _digest_key(value: int, bits: int) -> bytes:
    return value.to_bytes(max(1, (bits + 7) // 8), "big")


def _effective_digest(payload: bytes, modulus_bits: int) -> tuple[int, bool, int]:
    value, truncated = digest_as_int(hash512(payload), modulus_bits)
    width = modulus_bits - 8 if truncated else 512
    return value, truncated, width


def package_binary(payload: bytes, vault: KeyVault) -> SignedPackage:
    if not payload:
        raise EmptyPayload("nothing to package")
    pub = vault.public_key
    value, truncated, width = _effective_digest(payload, pub.bit_length)
    enc = rc4_apply(payload, _digest_key(value, width))
    # textbook RSA signing is the raw private-key operation
    sig = vault.vault_decrypt(value)
    return SignedPackage(enc, sig, pub.byte_length, truncated)


def _validate(pkg: SignedPackage | bytes, public_key: RsaPublicKey, call) -> bytes:
    if isinstance(pkg, (bytes, bytearray)):
        try:
            pkg = SignedPackage.from_bytes(bytes(pkg))
        except PackageFormatError as exc:
            raise SignatureMismatch(f"malformed package: {exc}") from None
    bits = public_key.bit_length
    if pkg.truncated != digest_as_int(0, bits)[1] or pkg.sig_length != public_key.byte_length:
        raise SignatureMismatch("package header does not fit this key")
    try:
        recovered = call("rsa_verify", sig=pkg.sig, pub=public_key)
    except MessageOutOfRange:
        raise SignatureMismatch("signature outside [0, n)") from None
    width = bits - 8 if pkg.truncated else 512
    if recovered >> width or not pkg.enc:
        raise SignatureMismatch("recovered digest does not fit")
    payload = call("rc4_apply", data=pkg.enc, key=_digest_key(recovered, width))
    if digest_as_int(call("hash512", data=payload), bits)[0] != recovered:
        raise SignatureMismatch("payload hash does not match the signed digest")
    return payload


_DIRECT = {"rsa_verify": rsa_verify, "rc4_apply": rc4_apply, "hash512": hash512}


def validate_and_unpack(pkg: SignedPackage | bytes, public_key: RsaPublicKey) -> bytes:
    """Return the payload, or raise :class:`SignatureMismatch`."""
    return _validate(pkg, public_key, lambda name, **kw: _DIRECT[name](**kw))


def flip_bit(data: bytes, position: int) -> bytes:
    out = bytearray(data)
    out[position // 8] ^= 0x80 >> (position % 8)
    return bytes(out)


# -- rendezvous domains ------------------------------------------------------

class DgaVariant(str, enum.Enum):
    A = "A"
    B = "B"


@dataclass(frozen=True)
class DgaConfig:
    variant: DgaVariant = DgaVariant.A
    seed: int = 0
    min_length: int = 4
    max_length: int = 10

    def __post_init__(self):
        if not 1 <= self.min_length <= self.max_length:
            raise ValueError("invalid name length bounds")

    @property
    def suffixes(self) -> tuple[str, ...]:
        return SUFFIXES_B if DgaVariant(self.variant) is DgaVariant.B else SUFFIXES_A


def generate_domains(config: DgaConfig, count: int) -> list[str]:
    """Names alternate between two independently seeded generators.

    The "own" generator supplies the length and odd-position characters
    (1-based); the "system" generator supplies even positions and the suffix.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    own = SeededRandom(derive_seed(config.seed, "dga/own"))
    system = SeededRandom(derive_seed(config.seed, "dga/system"))
    suffixes = config.suffixes
    domains = []
    for _ in range(count):
        length = own.randint(config.min_length, config.max_length)
        name = "".join(_ALPHABET[(own if pos % 2 else system).randbelow(26)] for pos in range(1, length + 1))
        domains.append(name + suffixes[system.randbelow(len(suffixes))])
    return domains


def choose_http_port(rng: RandomSource) -> int:
    return rng.randint(*PORT_RANGE)


# -- update push -------------------------------------------------------------

def _client_validate(host: SimHost, data: bytes, public_key: RsaPublicKey) -> bytes:
    """Same check, with every primitive routed through the host's gateway."""
    proc = host.spawn(Privilege.SYSTEM)
    return _validate(data, public_key, lambda name, **kw: host.invoke(proc, name, **kw))


def simulate_update_push(network: SimNetwork, pkg: SignedPackage, public_key: RsaPublicKey,
                         tamper: frozenset[int] | set[int] = frozenset(), seed: int = 0) -> dict[int, str]:
    """Push ``pkg`` to every host; tampered hosts get a copy with one flipped
    bit inside ``enc || sig``. Returns ``{host_id: "accept" | "reject"}``."""
    rng = SeededRandom(derive_seed(seed, "tamper"))
    wire = pkg.to_bytes()
    enc_bits = 8 * len(pkg.enc)
    body_bits = enc_bits + 8 * pkg.sig_length
    for host in network.hosts:
        data = wire
        if host.host_id in tamper:
            pos = rng.randbelow(body_bits)
            # enc starts after the u32 length; sig after the u16 that follows enc
            offset = 32 if pos < enc_bits else 48
            data = flip_bit(wire, offset + pos)
        network.send(ATTACKER, host.host_id, data, "update")
    verdicts = {}
    for msg in network.deliver_all():
        host = network.host(msg.receiver)
        try:
            _client_validate(host, msg.payload, public_key)
            verdicts[host.host_id] = "accept"
        except SignatureMismatch:
            verdicts[host.host_id] = "reject"
    return verdicts


@dataclass(frozen=True)
class ConfickerConfig:
    seed: int = 0
    bits: int = 512
    payload_size: int = 4096
    tamper: tuple[int, ...] = ()
    dga_variant: DgaVariant = DgaVariant.B
    dga_count: int = 250


def run_conficker_scenario(network: SimNetwork, config: ConfickerConfig) -> ScenarioReport:
    report = ScenarioReport("conficker")
    rng = SeededRandom(derive_seed(config.seed, "attacker"))
    vault, pub = attacker_setup(config.bits, rng)
    payload = rng.random_bytes(config.payload_size)
    pkg = package_binary(payload, vault)
    report.step("package", payload_bytes=len(payload), package_bytes=len(pkg.to_bytes()),
                truncated=pkg.truncated, modulus_bits=pub.bit_length)

    verdicts = simulate_update_push(network, pkg, pub, frozenset(config.tamper), config.seed)
    report.verdicts["update"] = {str(h): v for h, v in sorted(verdicts.items())}
    expected = {h.host_id: ("reject" if h.host_id in config.tamper else "accept") for h in network.hosts}
    report.verdicts["update_as_expected"] = verdicts == expected

    domains = generate_domains(DgaConfig(config.dga_variant, config.seed), config.dga_count)
    by_suffix = {}
    for d in domains:
        suffix = "." + d.rsplit(".", 1)[1]
        by_suffix[suffix] = by_suffix.get(suffix, 0) + 1
    report.step("dga", variant=DgaVariant(config.dga_variant).value, count=len(domains),
                sample=domains[:10], suffix_counts=by_suffix)
    report.step("http_port", port=choose_http_port(SeededRandom(derive_seed(config.seed, "port"))))

    report.outcome = "success" if report.verdicts["update_as_expected"] else "protocol_failure"
    report.finish(network)
    return report
