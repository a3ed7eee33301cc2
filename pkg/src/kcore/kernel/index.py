"""The capped h-index that refines a node's coreness estimate."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numba import njit

# unknown neighbor estimate; any value >= the node's own estimate behaves the same
INF = np.iinfo(np.int32).max


@njit(nogil=True, cache=True, inline="always")
def _scan_counts(counts, core):
    total = 0
    for t in range(core, 0, -1):
        total += counts[t]
        if total >= t:
            return t
    return 0


@njit(nogil=True, cache=True)
def index_of_slice(values, lo, hi, core, counts):
    """Capped h-index of ``values[lo:hi]``; ``counts`` is scratch of length > core."""
    if core <= 0:
        return 0
    for t in range(core + 1):
        counts[t] = 0
    for i in range(lo, hi):
        e = values[i]
        counts[e if e < core else core] += 1
    return _scan_counts(counts, core)


@njit(nogil=True, cache=True)
def index_of_gather(est, neighbors, lo, hi, core, counts):
    """Capped h-index of ``est[neighbors[lo:hi]]``."""
    if core <= 0:
        return 0
    for t in range(core + 1):
        counts[t] = 0
    for i in range(lo, hi):
        e = est[neighbors[i]]
        counts[e if e < core else core] += 1
    return _scan_counts(counts, core)


def compute_index(neighbor_estimates: Sequence[int], current_core: int) -> int:
    """Largest ``t <= current_core`` such that at least ``t`` estimates are ``>= t``."""
    if current_core < 0:
        raise ValueError("current_core must be non-negative")
    vals = np.asarray(neighbor_estimates, dtype=np.int64)
    if vals.size and vals.min() < 0:
        raise ValueError("estimates must be non-negative")
    counts = np.empty(current_core + 1, dtype=np.int64)
    return int(index_of_slice(vals, 0, len(vals), current_core, counts))
