"""Scenario configuration files: parsing, validation and dispatch."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import jsonschema

from .conficker import ConfickerConfig, DgaVariant, run_conficker_scenario
from .detect import POLICIES, DetectorConfig, Privilege
from .dps import DpsConfig, run_dps_scenario
from .errors import ConfigInvalid
from .extortion import DEFAULT_DEMAND, ExtortionConfig, run_extortion_scenario
from .hostsim import SimNetwork, create_network
from .report import ScenarioReport, load_schema
from .sharing import SharingConfig, run_sharing_scenario

SCENARIOS = ("extortion1", "extortion2", "sharing", "dps", "conficker")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int = 0
    hosts: int = 3
    files_per_host: int = 10
    credentials_per_host: int = 3
    key_bits: int = 512
    passes: int = 1
    demand: int = DEFAULT_DEMAND
    policy: str = "permissive"
    virus_privilege: str = "user"
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    # sharing
    threshold: int = 3
    shares: int = 5
    cleanup: tuple[int, ...] = ()
    # dps
    group_bits: int = 64
    snatches: int = 1
    chunking: bool = True
    # conficker
    tamper: tuple[int, ...] = ()
    payload_size: int = 4096
    dga_variant: str = "B"
    dga_count: int = 250

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["cleanup"] = list(self.cleanup)
        doc["tamper"] = list(self.tamper)
        return doc

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=seed)


def _field_of(error: jsonschema.ValidationError) -> str:
    path = [str(p) for p in error.absolute_path if not isinstance(p, int)]
    if error.validator == "required":
        path.append(error.message.split("'")[1])
    elif error.validator == "additionalProperties":
        extra = [k for k in error.instance if k not in error.schema.get("properties", {})]
        path.append(extra[0] if extra else "?")
    return ".".join(path) or "<root>"


def _check_semantics(cfg: ScenarioConfig) -> None:
    def bad(name: str, message: str):
        raise ConfigInvalid(name, message)

    if cfg.scenario == "sharing":
        if cfg.threshold > cfg.shares:
            bad("threshold", f"threshold k={cfg.threshold} exceeds shares n={cfg.shares}")
        if cfg.shares > cfg.hosts:
            bad("shares", f"{cfg.shares} shares need at least that many hosts, have {cfg.hosts}")
        if any(h >= cfg.shares for h in cfg.cleanup):
            bad("cleanup", "cleanup names a host that holds no share")
    if cfg.scenario == "conficker" and any(h >= cfg.hosts for h in cfg.tamper):
        bad("tamper", f"tamper set names a host outside 0..{cfg.hosts - 1}")
    if cfg.scenario == "dps" and cfg.credentials_per_host < 1:
        bad("credentials_per_host", "password snatching needs at least one credential per host")


def parse_config(doc: dict) -> ScenarioConfig:
    """Validate a decoded config document; raise :class:`ConfigInvalid` naming the field."""
    validator = jsonschema.Draft202012Validator(load_schema("config.schema.json"))
    error = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if error is not None:
        raise ConfigInvalid(_field_of(error), error.message)
    values = dict(doc)
    values["detector"] = DetectorConfig(**doc.get("detector", {}))
    for key in ("cleanup", "tamper"):
        if key in values:
            values[key] = tuple(values[key])
    known = {f.name for f in fields(ScenarioConfig)}
    cfg = ScenarioConfig(**{k: v for k, v in values.items() if k in known})
    _check_semantics(cfg)
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigInvalid("<file>", f"not valid JSON: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(doc, dict):
        raise ConfigInvalid("<root>", "config must be a JSON object")
    return parse_config(doc)


def build_network(cfg: ScenarioConfig) -> SimNetwork:
    return create_network(cfg.hosts, cfg.files_per_host, cfg.seed, policy=POLICIES[cfg.policy],
                          credentials_per_host=cfg.credentials_per_host)


def run_config(cfg: ScenarioConfig) -> ScenarioReport:
    """Build the world described by ``cfg``, run its scenario, echo the config."""
    network = build_network(cfg)
    privilege = Privilege[cfg.virus_privilege.upper()]
    if cfg.scenario in ("extortion1", "extortion2"):
        report = run_extortion_scenario(network, ExtortionConfig(
            variant=int(cfg.scenario[-1]), seed=cfg.seed, bits=cfg.key_bits, passes=cfg.passes,
            demand=cfg.demand, virus_privilege=privilege, detector=cfg.detector))
    elif cfg.scenario == "sharing":
        report = run_sharing_scenario(network, SharingConfig(
            k=cfg.threshold, n=cfg.shares, seed=cfg.seed, bits=cfg.key_bits, passes=cfg.passes,
            demand=cfg.demand, cleanup=cfg.cleanup, virus_privilege=privilege, detector=cfg.detector))
    elif cfg.scenario == "dps":
        report = run_dps_scenario(network, DpsConfig(
            seed=cfg.seed, group_bits=cfg.group_bits, snatches=cfg.snatches, chunking=cfg.chunking))
    else:
        report = run_conficker_scenario(network, ConfickerConfig(
            seed=cfg.seed, bits=cfg.key_bits, payload_size=cfg.payload_size, tamper=cfg.tamper,
            dga_variant=DgaVariant(cfg.dga_variant), dga_count=cfg.dga_count))
    report.config = cfg.to_dict()
    return report
