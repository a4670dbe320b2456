"""Reliability-aware H-infinity speed control of an EV PMSM drive."""

__version__ = "0.1.0"
