"""Per-node mailboxes and the node-level steps of the message protocol.

Every node owns a FIFO of ``(sender, estimate)`` messages guarded by its own
spin lock, and a table of the last estimate heard from each neighbor. The
table is a flat array aligned with the CSR neighbor slice; a sender is mapped
to its slot by binary search (sorted layout) or by a per-node open-addressing
table (hashed layout, kept for the layout ablation).

Kernels release the GIL, so workers calling them from Python threads run in
parallel. A worker holds at most one mailbox lock at any time.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .._atomics import fetch_add, spin_lock, spin_unlock
from ..graph import Graph
from .index import INF, index_of_slice

# stats row layout
CHANGED, SENT, SUPPRESSED, RECEIVED, OVERFLOW = range(5)
N_STATS = 5

_HASH_MUL = 2654435761


@njit(cache=True)
def _build_hash_tables(offsets, neighbors):
    n = len(offsets) - 1
    hoff = np.zeros(n + 1, dtype=np.int64)
    for u in range(n):
        d = offsets[u + 1] - offsets[u]
        size = 1
        while size < 2 * d:
            size *= 2
        hoff[u + 1] = hoff[u] + (size if d > 0 else 0)
    keys = np.full(hoff[n], -1, dtype=np.int32)
    slots = np.zeros(hoff[n], dtype=np.int64)
    for u in range(n):
        base = hoff[u]
        mask = hoff[u + 1] - base - 1
        for j in range(offsets[u], offsets[u + 1]):
            v = neighbors[j]
            h = ((v * _HASH_MUL) >> 7) & mask
            while keys[base + h] != -1:
                h = (h + 1) & mask
            keys[base + h] = v
            slots[base + h] = j
    return hoff, keys, slots


@njit(nogil=True, cache=True, inline="always")
def _slot(u, v, offsets, neighbors, hashed, hoff, hkeys, hslots):
    if hashed:
        base = hoff[u]
        mask = hoff[u + 1] - base - 1
        h = ((v * _HASH_MUL) >> 7) & mask
        while hkeys[base + h] != v:
            h = (h + 1) & mask
        return hslots[base + h]
    a = offsets[u]
    b = offsets[u + 1]
    while a < b:
        mid = (a + b) >> 1
        if neighbors[mid] < v:
            a = mid + 1
        else:
            b = mid
    return a


@njit(nogil=True, cache=True)
def _send_node(u, selective, offsets, neighbors, core, known, mail_base, mail_count,
               mail_from, mail_est, locks, changed, stats):
    c = core[u]
    for j in range(offsets[u], offsets[u + 1]):
        # a neighbor whose last known estimate is <= c cannot use this value
        if selective and c >= known[j]:
            stats[SUPPRESSED] += 1
            continue
        v = neighbors[j]
        spin_lock(locks, v)
        k = mail_count[v]
        if mail_base[v] + k < mail_base[v + 1]:
            mail_from[mail_base[v] + k] = u
            mail_est[mail_base[v] + k] = c
            mail_count[v] = k + 1
        else:
            stats[OVERFLOW] += 1
        spin_unlock(locks, v)
        stats[SENT] += 1
    changed[u] = 0


# The node loops below are written out in full: calling a helper that takes
# every state array costs a refcount round trip per array per node.

@njit(nogil=True, cache=True)
def process_range(lo, hi, fused, selective, offsets, neighbors, hashed, hoff, hkeys, hslots,
                  core, known, mail_base, mail_count, mail_from, mail_est, locks, changed,
                  counts, stats):
    """Drain, fold and recompute nodes ``lo..hi-1`` (and send, when fused)."""
    for u in range(lo, hi):
        a = offsets[u]
        b = offsets[u + 1]
        if a == b:
            continue
        spin_lock(locks, u)
        base = mail_base[u]
        cnt = mail_count[u]
        dirty = False
        for i in range(base, base + cnt):
            s = _slot(u, mail_from[i], offsets, neighbors, hashed, hoff, hkeys, hslots)
            k = mail_est[i]
            if k < known[s]:
                known[s] = k
                dirty = True
        mail_count[u] = 0
        spin_unlock(locks, u)
        stats[RECEIVED] += cnt
        if dirty:
            t = index_of_slice(known, a, b, core[u], counts)
            if t < core[u]:
                core[u] = t
                changed[u] = 1
                stats[CHANGED] = 1
                if fused:
                    _send_node(u, selective, offsets, neighbors, core, known, mail_base,
                               mail_count, mail_from, mail_est, locks, changed, stats)


@njit(nogil=True, cache=True)
def send_range(lo, hi, selective, offsets, neighbors, core, known, mail_base, mail_count,
               mail_from, mail_est, locks, changed, stats):
    """Deliver the estimate of every changed node in ``lo..hi-1`` and clear its flag."""
    for u in range(lo, hi):
        if not changed[u]:
            continue
        c = core[u]
        for j in range(offsets[u], offsets[u + 1]):
            if selective and c >= known[j]:
                stats[SUPPRESSED] += 1
                continue
            v = neighbors[j]
            spin_lock(locks, v)
            k = mail_count[v]
            if mail_base[v] + k < mail_base[v + 1]:
                mail_from[mail_base[v] + k] = u
                mail_est[mail_base[v] + k] = c
                mail_count[v] = k + 1
            else:
                stats[OVERFLOW] += 1
            spin_unlock(locks, v)
            stats[SENT] += 1
        changed[u] = 0


@njit(nogil=True, cache=True)
def process_claimed(cursor, batch, fused, selective, offsets, neighbors, hashed, hoff, hkeys,
                    hslots, core, known, mail_base, mail_count, mail_from, mail_est, locks,
                    changed, counts, stats):
    n = len(core)
    while True:
        start = fetch_add(cursor, 0, batch)
        if start >= n:
            return
        process_range(start, min(start + batch, n), fused, selective, offsets, neighbors,
                      hashed, hoff, hkeys, hslots, core, known, mail_base, mail_count,
                      mail_from, mail_est, locks, changed, counts, stats)


@njit(nogil=True, cache=True)
def send_claimed(cursor, batch, selective, offsets, neighbors, core, known, mail_base,
                 mail_count, mail_from, mail_est, locks, changed, stats):
    n = len(core)
    while True:
        start = fetch_add(cursor, 0, batch)
        if start >= n:
            return
        send_range(start, min(start + batch, n), selective, offsets, neighbors, core, known,
                   mail_base, mail_count, mail_from, mail_est, locks, changed, stats)


class MessageMail:
    """Protocol state of every node: estimate, neighbor table, mailbox, lock.

    ``fused`` selects single-round processing (send right after a change),
    which can leave up to two undrained messages per neighbor, so mailboxes
    are sized accordingly.
    """

    def __init__(self, g: Graph, *, fused: bool = False, selective: bool = False,
                 sorted_neighbors: bool = True):
        self.graph = g
        self.fused = fused
        self.selective = selective
        self.hashed = not sorted_neighbors
        n = g.node_count
        self.offsets = g.offsets
        self.neighbors = g.neighbors
        if self.hashed:
            self.hoff, self.hkeys, self.hslots = _build_hash_tables(g.offsets, g.neighbors)
        else:
            self.hoff = np.zeros(1, dtype=np.int64)
            self.hkeys = np.zeros(1, dtype=np.int32)
            self.hslots = np.zeros(1, dtype=np.int64)
        self.core = g.degrees().astype(np.int32)
        self.known = np.full(len(g.neighbors), INF, dtype=np.int32)
        self.mail_base = g.offsets * (2 if fused else 1)
        self.mail_count = np.zeros(n, dtype=np.int64)
        self.mail_from = np.empty(self.mail_base[-1], dtype=np.int32)
        self.mail_est = np.empty(self.mail_base[-1], dtype=np.int32)
        self.locks = np.zeros(n, dtype=np.int32)
        # every node announces its degree first
        self.changed = (self.core > 0).astype(np.uint8)
        self.cursor = np.zeros(1, dtype=np.int64)

    def scratch(self) -> np.ndarray:
        """Per-worker counting buffer for the index computation."""
        return np.empty(self.graph.max_degree + 1, dtype=np.int64)

    @staticmethod
    def new_stats() -> np.ndarray:
        return np.zeros(N_STATS, dtype=np.int64)

    def _node_args(self):
        return (self.offsets, self.neighbors, self.hashed, self.hoff, self.hkeys, self.hslots,
                self.core, self.known, self.mail_base, self.mail_count, self.mail_from,
                self.mail_est, self.locks, self.changed)

    def _send_args(self):
        return (self.offsets, self.neighbors, self.core, self.known, self.mail_base,
                self.mail_count, self.mail_from, self.mail_est, self.locks, self.changed)

    def process(self, lo: int, hi: int, counts: np.ndarray, stats: np.ndarray) -> bool:
        """Drain, fold and recompute nodes ``lo..hi-1``; True if any estimate dropped."""
        before = stats[CHANGED]
        stats[CHANGED] = 0
        process_range(lo, hi, self.fused, self.selective, *self._node_args(), counts, stats)
        local = bool(stats[CHANGED])
        stats[CHANGED] = before | local
        return local

    def send(self, lo: int, hi: int, stats: np.ndarray) -> None:
        """Deliver the current estimate of every changed node in ``lo..hi-1``."""
        send_range(lo, hi, self.selective, *self._send_args(), stats)

    def process_claimed(self, batch: int, counts: np.ndarray, stats: np.ndarray) -> None:
        process_claimed(self.cursor, batch, self.fused, self.selective, *self._node_args(),
                        counts, stats)

    def send_claimed(self, batch: int, stats: np.ndarray) -> None:
        send_claimed(self.cursor, batch, self.selective, *self._send_args(), stats)

    def post(self, u: int, sender: int, estimate: int) -> None:
        """Enqueue one message for ``u`` (single-threaded helper for tests and setup)."""
        k = self.mail_count[u]
        if self.mail_base[u] + k >= self.mail_base[u + 1]:
            raise OverflowError(f"mailbox of node {u} is full")
        self.mail_from[self.mail_base[u] + k] = sender
        self.mail_est[self.mail_base[u] + k] = estimate
        self.mail_count[u] = k + 1

    def pending(self, u: int) -> list[tuple[int, int]]:
        lo = self.mail_base[u]
        hi = lo + self.mail_count[u]
        return list(zip(self.mail_from[lo:hi].tolist(), self.mail_est[lo:hi].tolist()))

    def known_estimate(self, u: int, v: int) -> int:
        s = int(_slot(u, v, self.offsets, self.neighbors, self.hashed, self.hoff, self.hkeys,
                      self.hslots))
        return int(self.known[s])

    def active_count(self) -> int:
        return int(np.count_nonzero(self.mail_count))
