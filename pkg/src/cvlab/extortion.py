"""Three-round hybrid-encryption extortion, simulated end to end.

Round 1: the payload draws 384 bits from the host TRBG, CBC-encrypts every
file under the first 128 (key) and next 64 (IV) bits, RSA-encrypts IV||key
under the author's public key and leaves a note. Round 2: the victim sends
that asymmetric ciphertext (optionally with one encrypted sample file) and the
payment. Round 3: the author's vault decrypts it and the key/IV go back.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field

from .crypto import BLOCK_SIZE, KEY_SIZE, Direction, RandomSource, RsaPublicKey, SeededRandom
from .crypto import cbc_apply, derive_seed, mod_inverse, mod_pow, rsa_keygen
from .detect import DetectorConfig, Privilege, scan_host
from .errors import (AlreadyInfected, InsufficientPayment, MalformedCiphertext, MalformedPadding,
                     MessageOutOfRange, NoNote, PolicyDenied, WrongKey)
from .hostsim import ATTACKER, SimHost, SimNetwork
from .report import ScenarioReport

NOTE_PATH = "VIRUS DAMAGE"
TRBG_DRAW_BITS = 384
KEY_MATERIAL_SIZE = BLOCK_SIZE + KEY_SIZE  # IV || key
DEFAULT_DEMAND = 100
DEFAULT_CONTACT = "anon-drop:7f3a91c2"
TOY_FACTOR_LIMIT = 32
_MIN_PAD = 8
_SCRATCH = "virus.keybuf"


class KeyVault:
    """Holds an RSA private key that can be used but never read.

    The only public surface is ``public_key`` and ``vault_decrypt``; the
    private exponent lives in a closure and the object refuses to be copied
    or pickled.
    """

    __slots__ = ("public_key", "vault_decrypt")

    def __init__(self, pair):
        n, d = pair.n, pair.d

        def vault_decrypt(c: int) -> int:
            """Raw private-key operation ``c^d mod n``."""
            if not 0 <= c < n:
                raise MessageOutOfRange("ciphertext must lie in [0, n)")
            return mod_pow(c, d, n)

        object.__setattr__(self, "public_key", pair.public_key)
        object.__setattr__(self, "vault_decrypt", vault_decrypt)

    def __setattr__(self, name, value):
        raise AttributeError("KeyVault is read-only")

    def __reduce__(self):
        raise TypeError("private key is non-exportable")

    def __copy__(self):
        raise TypeError("private key is non-exportable")

    def __deepcopy__(self, memo):
        raise TypeError("private key is non-exportable")

    def __repr__(self):
        return f"KeyVault(modulus_bits={self.public_key.bit_length})"


def attacker_setup(bit_length: int = 512, rng: RandomSource | None = None) -> tuple[KeyVault, RsaPublicKey]:
    pair = rsa_keygen(bit_length, rng)
    vault = KeyVault(pair)
    return vault, vault.public_key


# -- key material <-> RSA plaintext ------------------------------------------

def _nonzero_stream(seed: bytes, length: int) -> bytes:
    out = bytearray()
    counter = 0
    while len(out) < length:
        block = hashlib.sha512(seed + counter.to_bytes(4, "big")).digest()
        out += bytes(b for b in block if b)
        counter += 1
    return bytes(out[:length])


def _chunk_size(pub: RsaPublicKey) -> int:
    return (pub.bit_length - 1) // 8


def encode_key_material(material: bytes, pub: RsaPublicKey, pad_seed: bytes) -> tuple[int, ...]:
    """Map IV||key to RSA plaintext integers.

    Normal moduli get one block: nonzero padding, a zero separator, then the
    material, one byte shorter than the modulus. Moduli too small for that
    fall back to unpadded chunks of ``(bits - 1) // 8`` bytes.
    """
    k = pub.byte_length
    room = k - 1 - len(material) - 1
    if room >= _MIN_PAD:
        em = _nonzero_stream(pad_seed, room) + b"\x00" + material
        return (int.from_bytes(em, "big"),)
    size = _chunk_size(pub)
    return tuple(int.from_bytes(material[i:i + size], "big") for i in range(0, len(material), size))


def decode_key_material(values: tuple[int, ...], pub: RsaPublicKey) -> bytes:
    k = pub.byte_length
    if len(values) == 1 and k - 1 - KEY_MATERIAL_SIZE - 1 >= _MIN_PAD:
        try:
            em = values[0].to_bytes(k - 1, "big")
        except OverflowError:
            raise MalformedCiphertext("plaintext wider than expected") from None
        sep = em.find(b"\x00")
        if sep < _MIN_PAD or len(em) - sep - 1 != KEY_MATERIAL_SIZE:
            raise MalformedCiphertext("bad key-material padding")
        return em[sep + 1:]
    size = _chunk_size(pub)
    widths = [min(size, KEY_MATERIAL_SIZE - i) for i in range(0, KEY_MATERIAL_SIZE, size)]
    if len(values) != len(widths):
        raise MalformedCiphertext("wrong number of key-material chunks")
    try:
        return b"".join(v.to_bytes(w, "big") for v, w in zip(values, widths))
    except OverflowError:
        raise MalformedCiphertext("chunk wider than expected") from None


# -- protocol artifacts ------------------------------------------------------

@dataclass(frozen=True)
class RansomNote:
    asym_ciphertext: tuple[int, ...]
    contact: str = DEFAULT_CONTACT
    demanded_amount: int = DEFAULT_DEMAND
    note_path: str = NOTE_PATH

    def to_bytes(self) -> bytes:
        doc = {
            "notice": "Your files have been encrypted. Send the block below with payment.",
            "contact": self.contact,
            "demanded_amount": self.demanded_amount,
            "asym_ciphertext": [format(v, "x") for v in self.asym_ciphertext],
        }
        return json.dumps(doc, indent=1, sort_keys=True).encode()

    @classmethod
    def from_bytes(cls, data: bytes) -> "RansomNote":
        doc = json.loads(data)
        return cls(tuple(int(v, 16) for v in doc["asym_ciphertext"]), doc["contact"],
                   doc["demanded_amount"])


@dataclass(frozen=True)
class InfectionReceipt:
    host_id: int
    encrypted_paths: tuple[str, ...]
    bytes_encrypted: int
    note: RansomNote
    bits_drawn: int = TRBG_DRAW_BITS
    surplus_bits: int = TRBG_DRAW_BITS - 8 * KEY_MATERIAL_SIZE

    def to_dict(self) -> dict:
        return {"host_id": self.host_id, "encrypted_paths": list(self.encrypted_paths),
                "bytes_encrypted": self.bytes_encrypted, "bits_drawn": self.bits_drawn,
                "surplus_bits": self.surplus_bits,
                "asym_ciphertext": [format(v, "x") for v in self.note.asym_ciphertext]}


@dataclass(frozen=True)
class PaymentMessage:
    host_id: int
    asym_ciphertext: tuple[int, ...]
    amount: int
    sample_path: str | None = None
    sample: bytes | None = None

    def to_bytes(self) -> bytes:
        return json.dumps({
            "host_id": self.host_id,
            "asym_ciphertext": [format(v, "x") for v in self.asym_ciphertext],
            "amount": self.amount,
            "sample_path": self.sample_path,
            "sample": None if self.sample is None else self.sample.hex(),
        }, sort_keys=True).encode()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PaymentMessage":
        doc = json.loads(data)
        sample = None if doc["sample"] is None else bytes.fromhex(doc["sample"])
        return cls(doc["host_id"], tuple(int(v, 16) for v in doc["asym_ciphertext"]), doc["amount"],
                   doc["sample_path"], sample)


@dataclass(frozen=True)
class Release:
    key: bytes
    iv: bytes
    demo: bytes | None = None

    def to_bytes(self) -> bytes:
        return json.dumps({"key": self.key.hex(), "iv": self.iv.hex(),
                           "demo": None if self.demo is None else self.demo.hex()}, sort_keys=True).encode()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Release":
        doc = json.loads(data)
        demo = None if doc["demo"] is None else bytes.fromhex(doc["demo"])
        return cls(bytes.fromhex(doc["key"]), bytes.fromhex(doc["iv"]), demo)


# -- protocol steps ----------------------------------------------------------

def _target_paths(host: SimHost) -> list[str]:
    return sorted(p for p in host.files if p != NOTE_PATH)


def infect_host(host: SimHost, public_key: RsaPublicKey, rng: RandomSource, *, process=None,
                passes: int = 1, demand: int = DEFAULT_DEMAND, contact: str = DEFAULT_CONTACT) -> InfectionReceipt:
    """Encrypt every file on ``host`` in place and leave a ransom note.

    All crypto goes through the host gateway as ``process`` (a fresh user
    process by default), so a restrictive policy stops the payload at its
    first call, before anything is written.
    """
    if NOTE_PATH in host.files:
        raise AlreadyInfected(f"host {host.host_id} already carries a note")
    proc = process or host.spawn(Privilege.USER)

    drawn = host.invoke(proc, "random_bits", rng=rng, count=TRBG_DRAW_BITS)
    buf = host.memory[_SCRATCH] = bytearray(drawn.to_bytes())
    key = bytes(buf[:KEY_SIZE])
    iv = bytes(buf[KEY_SIZE:KEY_SIZE + BLOCK_SIZE])
    surplus = bytes(buf[KEY_SIZE + BLOCK_SIZE:])

    paths = _target_paths(host)
    total = 0
    for path in paths:
        plain = host.files[path]
        host.write_file(path, host.invoke(proc, "cbc_apply", data=plain, key=key, iv=iv,
                                          direction=Direction.ENCRYPT, passes=passes))
        total += len(plain)

    values = encode_key_material(iv + key, public_key, surplus)
    asym = tuple(host.invoke(proc, "rsa_encrypt", m=v, pub=public_key) for v in values)

    # overwrite the plaintext key material in RAM before leaving
    buf[:] = bytes(len(buf))
    del host.memory[_SCRATCH]
    del key, iv, surplus, values

    note = RansomNote(asym, contact, demand)
    host.write_file(NOTE_PATH, note.to_bytes())
    return InfectionReceipt(host.host_id, tuple(paths), total, note)


def read_note(host: SimHost) -> RansomNote:
    if NOTE_PATH not in host.files:
        raise NoNote(f"host {host.host_id} has no ransom note")
    return RansomNote.from_bytes(host.files[NOTE_PATH])


def victim_pay(host: SimHost, note: RansomNote | None = None, include_sample: bool = False,
               amount: int | None = None) -> PaymentMessage:
    """Build the round-2 message; ``include_sample`` attaches one encrypted file."""
    on_host = read_note(host)
    note = note or on_host
    sample_path = sample = None
    if include_sample:
        paths = _target_paths(host)
        if paths:
            sample_path = paths[0]
            sample = host.files[sample_path]
    paid = note.demanded_amount if amount is None else amount
    return PaymentMessage(host.host_id, note.asym_ciphertext, paid, sample_path, sample)


def attacker_release(vault: KeyVault, payment: PaymentMessage, demand: int = DEFAULT_DEMAND,
                     passes: int = 1) -> Release:
    """Round 3: recover IV||key in the vault; decrypt a demo prefix if a sample came along."""
    if payment.amount < demand:
        raise InsufficientPayment(f"paid {payment.amount}, demanded {demand}")
    try:
        values = tuple(vault.vault_decrypt(c) for c in payment.asym_ciphertext)
    except MessageOutOfRange as exc:
        raise MalformedCiphertext(str(exc)) from None
    material = decode_key_material(values, vault.public_key)
    iv, key = material[:BLOCK_SIZE], material[BLOCK_SIZE:]
    demo = None
    if payment.sample is not None:
        try:
            plain = cbc_apply(payment.sample, key, iv, Direction.DECRYPT, passes)
        except MalformedPadding:
            raise MalformedCiphertext("sample does not decrypt under the recovered key") from None
        demo = plain[:math.ceil(len(plain) / 4)]
    return Release(key, iv, demo)


def victim_restore(host: SimHost, key: bytes, iv: bytes, *, process=None, passes: int = 1) -> int:
    """Decrypt every file and drop the note. Nothing is written unless every
    file decrypts with consistent padding."""
    read_note(host)
    proc = process or host.spawn(Privilege.USER)
    staged = {}
    for path in _target_paths(host):
        try:
            staged[path] = host.invoke(proc, "cbc_apply", data=host.files[path], key=key, iv=iv,
                                       direction=Direction.DECRYPT, passes=passes)
        except MalformedPadding:
            raise WrongKey(f"padding check failed on {path}") from None
    for path, plain in staged.items():
        host.write_file(path, plain)
    host.delete_file(NOTE_PATH)
    return len(staged)


# -- the analyst's view ------------------------------------------------------

class RecoveryVerdict(str, enum.Enum):
    IRRECOVERABLE = "irrecoverable"
    RECOVERED = "recovered"
    RECOVERABLE_VIA_BACKUP = "recoverable_via_backup"
    NOT_INFECTED = "not_infected"


@dataclass(frozen=True)
class AnalystResult:
    verdict: RecoveryVerdict
    files: dict[str, bytes] | None = None


def _factor_small(n: int) -> tuple[int, int]:
    if n % 2 == 0:
        return 2, n // 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return f, n // f
        f += 2
    raise ValueError(f"{n} has no non-trivial factor")


def analyst_attempt(host: SimHost, public_key: RsaPublicKey, toy_limit: int = TOY_FACTOR_LIMIT) -> AnalystResult:
    """What a defender holding only the virus image (the public key) can do.

    A backup always wins. Otherwise the only route is factoring the modulus,
    which is attempted only for toy sizes up to ``toy_limit`` bits.
    """
    if host.backup is not None:
        return AnalystResult(RecoveryVerdict.RECOVERABLE_VIA_BACKUP)
    if NOTE_PATH not in host.files:
        return AnalystResult(RecoveryVerdict.NOT_INFECTED)
    if public_key.bit_length > toy_limit:
        return AnalystResult(RecoveryVerdict.IRRECOVERABLE)

    p, q = _factor_small(public_key.n)
    lam = (p - 1) * (q - 1) // math.gcd(p - 1, q - 1)
    d = mod_inverse(public_key.e, lam)
    note = read_note(host)
    values = tuple(mod_pow(c, d, public_key.n) for c in note.asym_ciphertext)
    material = decode_key_material(values, public_key)
    iv, key = material[:BLOCK_SIZE], material[BLOCK_SIZE:]
    files = {path: cbc_apply(host.files[path], key, iv, Direction.DECRYPT) for path in _target_paths(host)}
    return AnalystResult(RecoveryVerdict.RECOVERED, files)


# -- whole scenario ----------------------------------------------------------

@dataclass(frozen=True)
class ExtortionConfig:
    variant: int = 1
    seed: int = 0
    bits: int = 512
    passes: int = 1
    demand: int = DEFAULT_DEMAND
    virus_privilege: Privilege = Privilege.USER
    detector: DetectorConfig = field(default_factory=DetectorConfig)

    def __post_init__(self):
        if self.variant not in (1, 2):
            raise ValueError("variant must be 1 or 2")


def _audit_counts(host: SimHost, start: int) -> dict:
    events = host.audit_log[start:]
    allowed = sum(1 for e in events if e.verdict.value == "allowed")
    return {"allowed": allowed, "denied": len(events) - allowed}


def infect_all(network: SimNetwork, pub: RsaPublicKey, seed: int, report: ScenarioReport, *,
               passes: int = 1, demand: int = DEFAULT_DEMAND,
               privilege: Privilege = Privilege.USER) -> dict[int, InfectionReceipt]:
    """Infect every host; records one step per host. Stops at the first
    policy denial and marks the report blocked."""
    receipts = {}
    for host in network.hosts:
        trbg = SeededRandom(derive_seed(seed, f"trbg/{host.host_id}"))
        mark = len(host.audit_log)
        try:
            receipt = infect_host(host, pub, trbg, process=host.spawn(privilege), passes=passes, demand=demand)
        except PolicyDenied as exc:
            report.step("infect", host=host.host_id, blocked=True, primitive=exc.primitive,
                        audit=_audit_counts(host, mark))
            report.outcome = "policy_blocked"
            return receipts
        receipts[host.host_id] = receipt
        report.step("infect", host=host.host_id, files=len(receipt.encrypted_paths),
                    bytes_encrypted=receipt.bytes_encrypted, rng_bits=trbg.bits_consumed,
                    audit=_audit_counts(host, mark))
        report.add_counter("bytes_encrypted", receipt.bytes_encrypted)
    return receipts


def run_extortion_scenario(network: SimNetwork, config: ExtortionConfig) -> ScenarioReport:
    """setup -> infect -> pay -> release -> restore over the network layer."""
    report = ScenarioReport(f"extortion{config.variant}")
    vault, pub = attacker_setup(config.bits, SeededRandom(derive_seed(config.seed, "attacker")))
    report.step("setup", modulus_bits=pub.bit_length)

    originals = {h.host_id: dict(h.files) for h in network.hosts}
    receipts = infect_all(network, pub, config.seed, report, passes=config.passes,
                          demand=config.demand, privilege=config.virus_privilege)
    for host in network.hosts:
        report.alerts.extend(a.to_dict() for a in scan_host(host, config.detector))
    if report.outcome == "policy_blocked":
        report.verdicts["files_unmodified"] = all(h.files == originals[h.host_id] for h in network.hosts)
        report.finish(network)
        return report

    for host_id in receipts:
        payment = victim_pay(network.host(host_id), include_sample=config.variant == 2)
        network.send(host_id, ATTACKER, payment.to_bytes(), "payment")
        report.step("pay", host=host_id, amount=payment.amount, sample=payment.sample_path)

    for msg in network.deliver_all():
        payment = PaymentMessage.from_bytes(msg.payload)
        release = attacker_release(vault, payment, config.demand, config.passes)
        if release.demo is not None:
            expected = originals[payment.host_id][payment.sample_path]
            ok = release.demo == expected[:math.ceil(len(expected) / 4)]
            report.step("demo", host=payment.host_id, path=payment.sample_path,
                        demo_bytes=len(release.demo), matches_plaintext=ok)
            report.verdicts.setdefault("demo_ok", True)
            report.verdicts["demo_ok"] &= ok
        network.send(ATTACKER, payment.host_id, release.to_bytes(), "release")
        report.step("release", host=payment.host_id)

    restored_all = True
    for msg in network.deliver_all():
        release = Release.from_bytes(msg.payload)
        host = network.host(msg.receiver)
        mark = len(host.audit_log)
        count = victim_restore(host, release.key, release.iv, passes=config.passes)
        exact = host.files == originals[host.host_id]
        restored_all &= exact and count == len(receipts[host.host_id].encrypted_paths)
        report.step("restore", host=host.host_id, files=count, bit_exact=exact,
                    audit=_audit_counts(host, mark))

    report.verdicts["restored"] = restored_all
    report.outcome = "success" if restored_all else "protocol_failure"
    report.finish(network)
    return report
