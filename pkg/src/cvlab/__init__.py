"""Deterministic, in-memory cryptovirology simulation lab."""

__version__ = "0.1.0"
