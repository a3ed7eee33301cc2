"""Reference coreness by minimum-degree peeling (Batagelj-Zaversnik bin sort)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from .graph import Graph

CORE_DTYPE = np.int32


@dataclass(frozen=True, eq=False)
class CorenessResult:
    coreness: np.ndarray

    @property
    def k_max(self) -> int:
        return int(self.coreness.max()) if len(self.coreness) else 0

    @property
    def k_avg(self) -> float:
        return float(self.coreness.mean()) if len(self.coreness) else 0.0

    def __len__(self) -> int:
        return len(self.coreness)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, CorenessResult):
            return np.array_equal(self.coreness, other.coreness)
        return NotImplemented


class Mismatch(NamedTuple):
    node: int
    candidate: int
    truth: int


@njit(cache=True)
def _bin_sort_peel(offsets, neighbors):
    n = len(offsets) - 1
    deg = np.empty(n, dtype=np.int32)
    md = 0
    for u in range(n):
        deg[u] = offsets[u + 1] - offsets[u]
        if deg[u] > md:
            md = deg[u]

    # bin[d] = first position of degree-d nodes in vert
    bins = np.zeros(md + 1, dtype=np.int64)
    for u in range(n):
        bins[deg[u]] += 1
    start = 0
    for d in range(md + 1):
        c = bins[d]
        bins[d] = start
        start += c

    vert = np.empty(n, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)
    # ascending node id within each bin
    for u in range(n):
        pos[u] = bins[deg[u]]
        vert[pos[u]] = u
        bins[deg[u]] += 1
    for d in range(md, 0, -1):
        bins[d] = bins[d - 1]
    bins[0] = 0

    for i in range(n):
        v = vert[i]
        for j in range(offsets[v], offsets[v + 1]):
            u = neighbors[j]
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u] = pw
                    vert[pu] = w
                    pos[w] = pu
                    vert[pw] = u
                bins[du] += 1
                deg[u] -= 1
    return deg


def peel_coreness(g: Graph) -> CorenessResult:
    """Exact coreness of every node in O(|V| + |E|).

    Nodes are removed in order of current degree using a bucket array; a
    node's degree at removal time is its coreness.
    """
    if g.node_count == 0:
        return CorenessResult(np.empty(0, dtype=CORE_DTYPE))
    core = _bin_sort_peel(g.offsets, g.neighbors)
    return CorenessResult(core.astype(CORE_DTYPE, copy=False))


def _as_array(r) -> np.ndarray:
    return r.coreness if isinstance(r, CorenessResult) else np.asarray(r)


def verify(candidate, truth) -> list[Mismatch]:
    """List every node whose candidate coreness differs from the truth."""
    a, b = _as_array(candidate), _as_array(truth)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {len(a)} != {len(b)}")
    bad = np.flatnonzero(a != b)
    return [Mismatch(int(u), int(a[u]), int(b[u])) for u in bad]
