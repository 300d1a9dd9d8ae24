"""Deterministic in-memory world: hosts, a crypto-API gateway, a FIFO network.

Nothing here touches a real file system or socket. Hosts keep their files,
credentials and a small "RAM" scratch area in plain dicts; every crypto call a
simulated process makes goes through :class:`CryptoGateway`, which consults the
active :class:`~cvlab.detect.Policy` and appends an :class:`AuditEvent`.
The only clock is the network's delivered-message counter.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Callable, Mapping

from . import crypto
from .crypto.rng import Bits, RandomSource, SeededRandom
from .detect import PERMISSIVE, Policy, Privilege, Verdict, enforce_policy, shannon_entropy, two_factor_check
from .errors import AuthenticationFailed, NoBackup, PolicyDenied, UnknownHost, UnknownPrimitive

# Pseudo host id for the remote party (virus author / update server).
ATTACKER = -1

FILE_EXTENSIONS = (".txt", ".doc", ".xls", ".html", ".pdf", ".rar")
_WORDS = (
    "the of and to in is that for it as was with be by on not he this are or his from at "
    "which but have an they you were her she there been one all we their has would when if "
    "so no will more out up into do any your what some can other than then them these two may "
    "first time report budget meeting quarter invoice project draft notes review summary"
).split()
_LOGIN_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"
_PASSWORD_ALPHABET = "".join(chr(c) for c in range(33, 127))


@dataclass
class Clock:
    now: int = 0


@dataclass(frozen=True)
class SimProcess:
    process_id: int
    host_id: int
    privilege: Privilege


@dataclass(frozen=True)
class AuditEvent:
    seq: int
    process_id: int
    primitive: str
    input_size: int
    verdict: Verdict
    time: int

    def to_dict(self) -> dict:
        return {"seq": self.seq, "process_id": self.process_id, "primitive": self.primitive,
                "input_size": self.input_size, "verdict": self.verdict.value, "time": self.time}


@dataclass(frozen=True)
class FileEvent:
    seq: int
    host_id: int
    time: int
    path: str
    kind: str  # "create" | "overwrite" | "delete"
    size: int
    entropy: float

    def to_dict(self) -> dict:
        return {"seq": self.seq, "time": self.time, "path": self.path, "kind": self.kind,
                "size": self.size, "entropy": self.entropy}


def _input_size(request: Mapping[str, Any]) -> int:
    size = 0
    for value in request.values():
        if isinstance(value, (bytes, bytearray)):
            size += len(value)
        elif isinstance(value, Bits):
            size += (value.length + 7) // 8
        elif isinstance(value, int) and not isinstance(value, bool):
            size += (value.bit_length() + 7) // 8
        elif isinstance(value, tuple) and all(isinstance(v, int) for v in value):
            size += sum((v.bit_length() + 7) // 8 for v in value)
    return size


DEFAULT_REGISTRY: Mapping[str, Callable[..., Any]] = MappingProxyType({
    "random_bits": crypto.random_bits,
    "tea_block": crypto.tea_block,
    "cbc_apply": crypto.cbc_apply,
    "rc4_apply": crypto.rc4_apply,
    "rsa_encrypt": crypto.rsa_encrypt,
    "rsa_decrypt": crypto.rsa_decrypt,
    "rsa_sign": crypto.rsa_sign,
    "rsa_verify": crypto.rsa_verify,
    "elgamal_encrypt": crypto.elgamal_encrypt,
    "elgamal_decrypt": crypto.elgamal_decrypt,
    "hash512": crypto.hash512,
})


class CryptoGateway:
    """The only route from a simulated process to a crypto primitive."""

    def __init__(self, policy: Policy = PERMISSIVE, registry: Mapping[str, Callable] = DEFAULT_REGISTRY):
        self.policy = policy
        self.registry = registry

    def invoke(self, host: "SimHost", process: SimProcess, primitive: str, request: Mapping[str, Any]):
        if process.host_id != host.host_id:
            raise ValueError("process does not belong to this host")
        if primitive not in self.registry:
            raise UnknownPrimitive(primitive)
        verdict = enforce_policy(self.policy, process.privilege, primitive)
        host._audit(process, primitive, _input_size(request), verdict)
        if verdict is Verdict.DENY:
            raise PolicyDenied(primitive, process.privilege.name.lower())
        return self.registry[primitive](**request)


@dataclass(eq=False)
class SimHost:
    host_id: int
    files: dict[str, bytes] = field(default_factory=dict)
    credentials: list[tuple[str, str]] = field(default_factory=list)
    token: str = "000000"
    backup: Mapping[str, bytes] | None = None
    audit_log: list[AuditEvent] = field(default_factory=list)
    file_events: list[FileEvent] = field(default_factory=list)
    # volatile memory; malware scratch space lives here
    memory: dict[str, bytearray] = field(default_factory=dict)
    require_2fa: bool = False
    clock: Clock = field(default_factory=Clock, repr=False)
    gateway: CryptoGateway = field(default_factory=CryptoGateway, repr=False)
    _seq: int = field(default=0, repr=False)
    _next_pid: int = field(default=1, repr=False)

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _audit(self, process, primitive, input_size, verdict):
        self.audit_log.append(AuditEvent(self._next_seq(), process.process_id, primitive,
                                         input_size, verdict, self.clock.now))

    def spawn(self, privilege: Privilege = Privilege.USER) -> SimProcess:
        pid = self._next_pid
        self._next_pid += 1
        return SimProcess(pid, self.host_id, Privilege(privilege))

    def invoke(self, process: SimProcess, primitive: str, **request):
        return self.gateway.invoke(self, process, primitive, request)

    def write_file(self, path: str, data: bytes) -> None:
        kind = "overwrite" if path in self.files else "create"
        self.files[path] = bytes(data)
        self.file_events.append(FileEvent(self._next_seq(), self.host_id, self.clock.now, path, kind,
                                          len(data), shannon_entropy(data)))

    def delete_file(self, path: str) -> None:
        del self.files[path]
        self.file_events.append(FileEvent(self._next_seq(), self.host_id, self.clock.now, path,
                                          "delete", 0, 0.0))

    def state_dict(self, include_audit: bool = True) -> dict:
        """Canonical JSON-ready view of everything the host holds."""
        state = {
            "host_id": self.host_id,
            "files": {p: self.files[p].hex() for p in sorted(self.files)},
            "backup": None if self.backup is None else {p: self.backup[p].hex() for p in sorted(self.backup)},
            "credentials": [list(c) for c in self.credentials],
            "token": self.token,
            "memory": {k: bytes(v).hex() for k, v in sorted(self.memory.items())},
            "file_events": [e.to_dict() for e in self.file_events],
            "require_2fa": self.require_2fa,
        }
        if include_audit:
            state["audit_log"] = [e.to_dict() for e in self.audit_log]
            state["next_pid"] = self._next_pid
        return state

    def serialize(self) -> bytes:
        return json.dumps(self.state_dict(), sort_keys=True, separators=(",", ":")).encode()

    def raw_image(self) -> bytes:
        """Serialized state followed by every stored byte string verbatim, for
        substring scans that must not depend on the hex encoding."""
        parts = [self.serialize()]
        parts += [self.files[p] for p in sorted(self.files)]
        if self.backup is not None:
            parts += [self.backup[p] for p in sorted(self.backup)]
        parts += [bytes(self.memory[k]) for k in sorted(self.memory)]
        return b"\x00".join(parts)


@dataclass(frozen=True)
class Message:
    seq: int
    sender: int
    receiver: int
    kind: str
    payload: bytes

    def trace_entry(self) -> dict:
        return {"seq": self.seq, "sender": self.sender, "receiver": self.receiver, "kind": self.kind,
                "size": len(self.payload), "sha256": hashlib.sha256(self.payload).hexdigest()}


@dataclass(eq=False)
class SimNetwork:
    hosts: list[SimHost]
    clock: Clock
    gateway: CryptoGateway
    queue: deque = field(default_factory=deque)
    trace: list[Message] = field(default_factory=list)
    _sent: int = 0

    def host(self, host_id: int) -> SimHost:
        if not 0 <= host_id < len(self.hosts):
            raise UnknownHost(host_id)
        return self.hosts[host_id]

    def _check_endpoint(self, endpoint: int) -> None:
        if endpoint != ATTACKER:
            self.host(endpoint)

    def send(self, sender: int, receiver: int, payload: bytes, kind: str = "data") -> Message:
        self._check_endpoint(sender)
        self._check_endpoint(receiver)
        self._sent += 1
        msg = Message(self._sent, sender, receiver, kind, bytes(payload))
        self.queue.append(msg)
        return msg

    def deliver_all(self) -> list[Message]:
        delivered = []
        while self.queue:
            msg = self.queue.popleft()
            self.clock.now += 1
            self.trace.append(msg)
            delivered.append(msg)
        return delivered

    def set_policy(self, policy: Policy) -> None:
        self.gateway.policy = policy

    def serialize(self) -> bytes:
        state = {"clock": self.clock.now,
                 "hosts": [h.state_dict() for h in self.hosts],
                 "trace": [m.trace_entry() for m in self.trace]}
        return json.dumps(state, sort_keys=True, separators=(",", ":")).encode()


def text_like_bytes(rng: RandomSource, size: int) -> bytes:
    """Word salad from a small vocabulary: readable, low-entropy content."""
    out = bytearray()
    while len(out) < size:
        out += _WORDS[rng.randbelow(len(_WORDS))].encode()
        out += b"\n" if rng.randbelow(12) == 0 else b" "
    return bytes(out[:size])


def _random_string(rng: RandomSource, alphabet: str, lo: int, hi: int) -> str:
    return "".join(alphabet[rng.randbelow(len(alphabet))] for _ in range(rng.randint(lo, hi)))


def create_host(host_id: int, files_per_host: int, rng: RandomSource, *, clock: Clock | None = None,
                gateway: CryptoGateway | None = None, credentials_per_host: int = 3,
                size_range: tuple[int, int] = (256, 4096)) -> SimHost:
    host = SimHost(host_id, clock=clock or Clock(), gateway=gateway or CryptoGateway())
    for i in range(files_per_host):
        ext = FILE_EXTENSIONS[rng.randbelow(len(FILE_EXTENSIONS))]
        size = rng.randint(*size_range)
        host.files[f"/home/user{host_id}/doc{i:03d}{ext}"] = text_like_bytes(rng, size)
    for _ in range(credentials_per_host):
        host.credentials.append((_random_string(rng, _LOGIN_ALPHABET, 8, 16),
                                 _random_string(rng, _PASSWORD_ALPHABET, 8, 16)))
    host.token = f"{rng.randbelow(10**6):06d}"
    return host


def create_network(n_hosts: int, files_per_host: int, seed: int, *, policy: Policy = PERMISSIVE,
                   credentials_per_host: int = 3, size_range: tuple[int, int] = (256, 4096)) -> SimNetwork:
    """Populate ``n_hosts`` hosts from ``seed``; identical seeds give identical worlds."""
    if n_hosts < 1:
        raise ValueError("n_hosts must be >= 1")
    if files_per_host < 0:
        raise ValueError("files_per_host must be >= 0")
    rng = SeededRandom(seed)
    clock = Clock()
    gateway = CryptoGateway(policy)
    hosts = [create_host(h, files_per_host, rng, clock=clock, gateway=gateway,
                         credentials_per_host=credentials_per_host, size_range=size_range)
             for h in range(n_hosts)]
    return SimNetwork(hosts, clock, gateway)


def snapshot_backup(host: SimHost) -> None:
    host.backup = MappingProxyType(dict(host.files))


def restore_from_backup(host: SimHost, auth: tuple[str, str, str] | None = None) -> None:
    """Roll files back to the snapshot. Hosts with ``require_2fa`` need
    ``auth=(login, password, token)``."""
    if host.require_2fa and (auth is None or not two_factor_check(host, *auth)):
        raise AuthenticationFailed("restore requires password and token")
    if host.backup is None:
        raise NoBackup(f"host {host.host_id} has no backup")
    for path in sorted(set(host.files) - set(host.backup)):
        host.delete_file(path)
    for path in sorted(host.backup):
        if host.files.get(path) != host.backup[path]:
            host.write_file(path, host.backup[path])


def gateway_invoke(host: SimHost, process: SimProcess, primitive: str, request: Mapping[str, Any]):
    return host.gateway.invoke(host, process, primitive, request)


def send(network: SimNetwork, sender: int, receiver: int, payload: bytes, kind: str = "data") -> Message:
    return network.send(sender, receiver, payload, kind)


def deliver_all(network: SimNetwork) -> list[Message]:
    return network.deliver_all()


def simulate_user_activity(host: SimHost, rng: RandomSource, writes: int) -> None:
    """Ordinary editing: rewrite random existing files with fresh text."""
    paths = sorted(host.files)
    if not paths:
        return
    for _ in range(writes):
        path = paths[rng.randbelow(len(paths))]
        host.write_file(path, text_like_bytes(rng, rng.randint(256, 4096)))
