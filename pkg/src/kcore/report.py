"""Per-run statistics and convergence instrumentation shared by all engines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .oracle import CorenessResult


class IterationStats(NamedTuple):
    iteration: int
    mean_error: float
    active_fraction: float


@dataclass
class RunReport:
    algorithm: str
    iterations: int = 0
    phase_mode: str = ""
    messages_sent: int | None = None
    messages_suppressed: int | None = None
    messages_received: int | None = None
    tail_pops: int = 0
    switch_iteration: int | None = None
    seconds: list[float] = field(default_factory=list)
    trace: list[IterationStats] = field(default_factory=list)
    monotone_violations: int = 0
    soundness_violations: int = 0
    activation_violations: int = 0

    @property
    def mean_seconds(self) -> float:
        return sum(self.seconds) / len(self.seconds) if self.seconds else float("nan")


def _truth_array(truth) -> np.ndarray:
    return truth.coreness if isinstance(truth, CorenessResult) else np.asarray(truth)


def record_iteration(report: RunReport, est, truth, active_count: int | None = None) -> IterationStats:
    """Append the mean estimate error and active fraction of the current state."""
    est = np.asarray(est)
    t = _truth_array(truth)
    n = len(est)
    err = float((est.astype(np.int64) - t).mean()) if n else 0.0
    frac = active_count / n if n and active_count else 0.0
    row = IterationStats(len(report.trace), err, frac)
    report.trace.append(row)
    return row


class Convergence:
    """Records a trace row per iteration boundary and audits the estimates.

    Counts nodes whose estimate went up since the previous boundary and nodes
    whose estimate dropped below the true coreness. Both must stay zero.
    """

    def __init__(self, truth):
        self.truth = _truth_array(truth).astype(np.int64)
        self._prev: np.ndarray | None = None

    def observe(self, report: RunReport, est, active_count: int | None = None) -> IterationStats:
        cur = np.asarray(est).astype(np.int64)
        if self._prev is not None:
            report.monotone_violations += int(np.count_nonzero(cur > self._prev))
        report.soundness_violations += int(np.count_nonzero(cur < self.truth))
        self._prev = cur
        return record_iteration(report, cur, self.truth, active_count)
