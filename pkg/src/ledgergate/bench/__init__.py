"""Latency benchmark harness: load generation, fixture seeding, reporting."""

from .runner import BenchPlan, BenchReport, OpStats, overhead_pct, run
from .fixture import SeedingFailureError, TargetUnreachableError, seed_fixture

__all__ = [
    "BenchPlan",
    "BenchReport",
    "OpStats",
    "SeedingFailureError",
    "TargetUnreachableError",
    "overhead_pct",
    "run",
    "seed_fixture",
]
