"""Scenario reports: the structured, deterministic output of every run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

REPORT_SCHEMA_ID = "cvlab.report/1"


@dataclass
class ScenarioReport:
    scenario: str
    config: dict = field(default_factory=dict)
    steps: list[dict] = field(default_factory=list)
    verdicts: dict[str, Any] = field(default_factory=dict)
    alerts: list[dict] = field(default_factory=list)
    counters: dict[str, int] = field(default_factory=dict)
    messages: list[dict] = field(default_factory=list)
    outcome: str = "success"
    timing: dict | None = None

    @property
    def success(self) -> bool:
        return self.outcome == "success"

    def step(self, name: str, **fields) -> None:
        self.steps.append({"step": name, **fields})

    def add_counter(self, name: str, amount: int = 1) -> None:
        self.counters[name] = self.counters.get(name, 0) + amount

    def finish(self, network) -> None:
        """Attach the network's delivered-message trace and clock."""
        self.messages = [m.trace_entry() for m in network.trace]
        self.counters["messages"] = len(network.trace)
        self.counters["logical_time"] = network.clock.now

    def to_dict(self) -> dict:
        doc = {
            "schema": REPORT_SCHEMA_ID,
            "scenario": self.scenario,
            "config": self.config,
            "steps": self.steps,
            "verdicts": self.verdicts,
            "alerts": self.alerts,
            "counters": self.counters,
            "messages": self.messages,
            "outcome": self.outcome,
            "success": self.success,
        }
        if self.timing is not None:
            doc["timing"] = self.timing
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioReport":
        return cls(doc["scenario"], doc["config"], doc["steps"], doc["verdicts"], doc["alerts"],
                   doc["counters"], doc["messages"], doc["outcome"], doc.get("timing"))

    @classmethod
    def from_json(cls, text: str) -> "ScenarioReport":
        return cls.from_dict(json.loads(text))


def load_schema(name: str) -> dict:
    return json.loads(resources.files("cvlab.schemas").joinpath(name).read_text())


def validate_report(doc: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``doc`` breaks the report schema."""
    import jsonschema

    jsonschema.validate(doc, load_schema("report.schema.json"))
