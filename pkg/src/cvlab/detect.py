"""Countermeasures: crypto-API access policy and a bulk-encryption monitor.

The monitor watches file overwrite events and flags bursts of
high-entropy rewrites, which is what a hybrid-encrypting payload looks like
from the file system's point of view.
"""

from __future__ import annotations

import enum
import hmac
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

CRYPTO_PRIMITIVES = (
    "random_bits",
    "tea_block",
    "cbc_apply",
    "rc4_apply",
    "rsa_encrypt",
    "rsa_decrypt",
    "rsa_sign",
    "rsa_verify",
    "elgamal_encrypt",
    "elgamal_decrypt",
    "hash512",
)


class Privilege(enum.IntEnum):
    USER = 0
    ADMIN = 1
    SYSTEM = 2


class Verdict(str, enum.Enum):
    ALLOW = "allowed"
    DENY = "denied"


@dataclass(frozen=True)
class Policy:
    """Minimum privilege per primitive; ``default`` covers unlisted names."""

    name: str
    minimum: Mapping[str, Privilege] = field(default_factory=dict)
    default: Verdict = Verdict.DENY


def enforce_policy(policy: Policy, privilege: Privilege, primitive: str) -> Verdict:
    required = policy.minimum.get(primitive)
    if required is None:
        return policy.default
    return Verdict.ALLOW if Privilege(privilege) >= required else Verdict.DENY


PERMISSIVE = Policy("permissive", {p: Privilege.USER for p in CRYPTO_PRIMITIVES}, Verdict.ALLOW)
# Hashing stays open: integrity checks are not a bulk-encryption risk.
STRICT = Policy(
    "strict",
    {p: (Privilege.USER if p == "hash512" else Privilege.SYSTEM) for p in CRYPTO_PRIMITIVES},
    Verdict.DENY,
)
POLICIES = {p.name: p for p in (PERMISSIVE, STRICT)}


def shannon_entropy(data: bytes) -> float:
    """Empirical entropy of the byte histogram, in bits per byte (0..8)."""
    if not data:
        return 0.0
    counts = np.bincount(np.frombuffer(data, dtype=np.uint8), minlength=256)
    probs = counts[counts > 0] / len(data)
    return float(-(probs * np.log2(probs)).sum())


@dataclass(frozen=True)
class DetectorConfig:
    window: int = 50
    threshold: int = 5
    entropy: float = 7.0

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if not 0 < self.entropy <= 8:
            raise ValueError("entropy threshold must lie in (0, 8]")


class AlertKind(str, enum.Enum):
    POLICY_DENIED = "PolicyDenied"
    MASS_ENCRYPTION = "MassEncryption"


@dataclass(frozen=True)
class Alert:
    host_id: int
    kind: AlertKind
    evidence: tuple[int, ...]

    def __post_init__(self):
        if not self.evidence:
            raise ValueError("an alert needs at least one piece of evidence")

    def to_dict(self) -> dict:
        return {"host_id": self.host_id, "kind": self.kind.value, "evidence": list(self.evidence)}


def mass_encryption_detector(events: Iterable, config: DetectorConfig = DetectorConfig()) -> list[Alert]:
    """Flag every high-entropy overwrite that completes a burst.

    An overwrite qualifies when the new content's entropy exceeds
    ``config.entropy``. A qualifying event at logical time ``t`` raises an
    alert when at least ``config.threshold`` qualifying events (itself
    included) fall in ``(t - window, t]``; the alert cites all of them by
    sequence number. Keying alerts on the triggering event keeps the detector
    monotone in all three parameters.
    """
    hits = [e for e in events if e.kind == "overwrite" and e.entropy > config.entropy]
    alerts = []
    start = 0
    for i, event in enumerate(hits):
        while event.time - hits[start].time >= config.window:
            start += 1
        in_window = hits[start:i + 1]
        if len(in_window) >= config.threshold:
            alerts.append(Alert(event.host_id, AlertKind.MASS_ENCRYPTION,
                                tuple(e.seq for e in in_window)))
    return alerts


def policy_alerts(audit_log: Iterable, host_id: int) -> list[Alert]:
    return [Alert(host_id, AlertKind.POLICY_DENIED, (ev.seq,))
            for ev in audit_log if ev.verdict == Verdict.DENY]


def scan_host(host, config: DetectorConfig = DetectorConfig()) -> list[Alert]:
    """All alerts for one simulated host: denied crypto calls, then bursts."""
    return policy_alerts(host.audit_log, host.host_id) + mass_encryption_detector(host.file_events, config)


def two_factor_check(host, login: str, password: str, token: str) -> bool:
    """Second-factor login: a known credential pair *and* the host's token."""
    known = any(hmac.compare_digest(login, l) and hmac.compare_digest(password, p)
                for l, p in host.credentials)
    return known and hmac.compare_digest(token, host.token)
