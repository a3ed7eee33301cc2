"""Benchmark harness: timed runs, sweeps, convergence traces and dataset fetching."""

from .datasets import CI_SUBSET, MANIFEST, Dataset, FetchResult, fetch_datasets
from .runner import (
    BenchResult, RunConfig, SweepResult, VerificationError, convergence_trace, run, sweep,
    write_csv,
)

__all__ = [
    "BenchResult", "CI_SUBSET", "Dataset", "FetchResult", "MANIFEST", "RunConfig", "SweepResult",
    "VerificationError", "convergence_trace", "fetch_datasets", "run", "sweep", "write_csv",
]
