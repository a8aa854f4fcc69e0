"""Deterministic simulator for hierarchical federated learning over a
wireless fog-cloud system, with per-round joint radio/compute resource
allocation, cost-based stopping, and straggler-aware flexible aggregation."""

from .config import RunConfig
from .runner import RunResult, run, run_flexible, run_full, write_csv

__all__ = ["RunConfig", "RunResult", "run", "run_full", "run_flexible", "write_csv"]

__version__ = "0.1.0"
