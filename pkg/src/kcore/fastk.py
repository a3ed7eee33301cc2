"""FastK: shared estimate and activation arrays with bulk-synchronous phases.

Each iteration:

1. process: workers claim batches of nodes; every active node clears its
   flag and recomputes its estimate from the global ``est`` array, which no
   one writes during this phase. New values go to a private buffer.
2. update: each worker writes its buffered values into ``est``.
3. activate: neighbors that may be affected by a drop are flagged active for
   the next iteration.
4. boundary: one thread aggregates the per-worker flags and decides whether
   to continue, stop, or hand the few remaining active nodes to a sequential
   priority-queue tail.

With the plain notification rule the activations are decided in phase 1
against the pre-update estimates and applied in phase 2, so there is no
separate phase 3. The extended rule needs the neighbor's post-update estimate
and therefore its own phase.
"""

from __future__ import annotations

import heapq
import threading

import numpy as np
from numba import njit

from ._atomics import exchange, fetch_add
from .graph import Graph
from .kernel.index import index_of_gather
from .options import OptimizationFlags, check_parallel_config
from .oracle import CorenessResult
from .report import Convergence, RunReport

DEFAULT_BATCH = 256


def should_notify(new_core: int, old_core: int, est_v: int) -> bool:
    """Whether a drop of u from ``old_core`` to ``new_core`` can affect neighbor v.

    v's estimate only counted u if u was at or above it, and only loses that
    support if u is now below it.
    """
    return new_core < est_v <= old_core


def switch_condition(active_count: int, batch: int) -> bool:
    return active_count < batch


@njit(nogil=True, cache=True, inline="always")
def _notify(extended, new, old, ev):
    if extended:
        return new < ev and old >= ev
    return ev > new


@njit(nogil=True, cache=True)
def _grow(a):
    b = np.empty(max(16, 2 * len(a)), dtype=a.dtype)
    b[: len(a)] = a
    return b


@njit(nogil=True, cache=True)
def _process_phase(cursor, batch, extended, offsets, neighbors, est, active, counts,
                   upd_node, upd_new, upd_old, act):
    n = len(est)
    nu = 0
    na = 0
    while True:
        start = fetch_add(cursor, 0, batch)
        if start >= n:
            break
        for u in range(start, min(start + batch, n)):
            if active[u] == 0:
                continue
            active[u] = 0
            old = est[u]
            new = index_of_gather(est, neighbors, offsets[u], offsets[u + 1], old, counts)
            if new < old:
                if nu == len(upd_node):
                    upd_node = _grow(upd_node)
                    upd_new = _grow(upd_new)
                    upd_old = _grow(upd_old)
                upd_node[nu] = u
                upd_new[nu] = new
                upd_old[nu] = old
                nu += 1
                if not extended:
                    for j in range(offsets[u], offsets[u + 1]):
                        v = neighbors[j]
                        if est[v] > new:
                            if na == len(act):
                                act = _grow(act)
                            act[na] = v
                            na += 1
    return upd_node, upd_new, upd_old, nu, act, na


@njit(nogil=True, cache=True)
def _update_phase(est, active, upd_node, upd_new, nu, act, na):
    for i in range(nu):
        est[upd_node[i]] = upd_new[i]
    fresh = 0
    for i in range(na):
        if exchange(active, act[i], np.uint8(1)) == 0:
            fresh += 1
    return fresh


@njit(nogil=True, cache=True)
def _activate_phase(offsets, neighbors, est, active, upd_node, upd_new, upd_old, nu):
    fresh = 0
    for i in range(nu):
        u = upd_node[i]
        new = upd_new[i]
        old = upd_old[i]
        for j in range(offsets[u], offsets[u + 1]):
            v = neighbors[j]
            ev = est[v]
            if new < ev and old >= ev:
                if exchange(active, v, np.uint8(1)) == 0:
                    fresh += 1
    return fresh


@njit(cache=True)
def _tail(offsets, neighbors, est, active, extended, counts):
    heap = [(np.int64(est[0]), np.int64(0)) for _ in range(0)]
    for u in range(len(est)):
        if active[u]:
            heap.append((np.int64(est[u]), np.int64(u)))
    heapq.heapify(heap)
    pops = 0
    while len(heap) > 0:
        _, u = heapq.heappop(heap)
        if active[u] == 0:
            continue
        active[u] = 0
        pops += 1
        old = est[u]
        new = index_of_gather(est, neighbors, offsets[u], offsets[u + 1], old, counts)
        if new < old:
            est[u] = new
            for j in range(offsets[u], offsets[u + 1]):
                v = neighbors[j]
                ev = est[v]
                if active[v] == 0 and _notify(extended, new, old, ev):
                    active[v] = 1
                    heapq.heappush(heap, (np.int64(ev), np.int64(v)))
    return pops


@njit(nogil=True, cache=True)
def _unstable_inactive(offsets, neighbors, est, active, counts):
    bad = 0
    for u in range(len(est)):
        if active[u] == 0:
            if index_of_gather(est, neighbors, offsets[u], offsets[u + 1], est[u], counts) != est[u]:
                bad += 1
    return bad


def sequential_tail(g: Graph, est: np.ndarray, active: np.ndarray, *, extended: bool = True) -> int:
    """Drain the active nodes lowest-estimate first, updating ``est`` in place.

    Returns the number of nodes recomputed.
    """
    if len(est) == 0:
        return 0
    counts = np.empty(g.max_degree + 1, dtype=np.int64)
    return int(_tail(g.offsets, g.neighbors, est, active, extended, counts))


class _FastKRun:
    def __init__(self, g: Graph, threads: int, batch: int, opts: OptimizationFlags,
                 report: RunReport, conv: Convergence | None, check_activation: bool):
        self.g = g
        self.threads = threads
        self.batch = batch
        self.extended = opts.extended_notify
        self.hybrid = opts.hybrid_tail
        self.report = report
        self.conv = conv
        self.check_activation = check_activation
        n = g.node_count
        self.est = g.degrees().astype(np.int32)
        self.active = np.ones(n, dtype=np.uint8)
        self.cursor = np.zeros(1, dtype=np.int64)
        self.changed = np.zeros(threads, dtype=bool)
        self.activated = np.zeros(threads, dtype=np.int64)
        self.go_on = True
        self.switch = False
        self._errors: list[BaseException] = []
        self.processed = threading.Barrier(threads, action=self._rewind)
        self.updated = threading.Barrier(threads)
        self.boundary = threading.Barrier(threads, action=self._iteration_end)

    def _rewind(self) -> None:
        self.cursor[0] = 0

    def _iteration_end(self) -> None:
        report = self.report
        report.iterations += 1
        self.go_on = bool(self.changed.any())
        self.changed[:] = False
        active = int(self.activated.sum())
        if self.conv:
            self.conv.observe(report, self.est, active)
        if self.check_activation:
            counts = np.empty(self.g.max_degree + 1, dtype=np.int64)
            report.activation_violations += int(
                _unstable_inactive(self.g.offsets, self.g.neighbors, self.est, self.active, counts))
        if self.go_on and self.hybrid and switch_condition(active, self.batch):
            self.switch = True
            report.switch_iteration = report.iterations

    def _worker(self, w: int) -> None:
        g, est, active = self.g, self.est, self.active
        counts = np.empty(g.max_degree + 1, dtype=np.int64)
        size = max(16, g.node_count // self.threads // 4)
        upd_node = np.empty(size, dtype=np.int32)
        upd_new = np.empty(size, dtype=np.int32)
        upd_old = np.empty(size, dtype=np.int32)
        act = np.empty(0 if self.extended else size, dtype=np.int32)
        try:
            while True:
                upd_node, upd_new, upd_old, nu, act, na = _process_phase(
                    self.cursor, self.batch, self.extended, g.offsets, g.neighbors, est, active,
                    counts, upd_node, upd_new, upd_old, act)
                self.changed[w] = nu > 0
                self.processed.wait()
                fresh = _update_phase(est, active, upd_node, upd_new, nu, act, na)
                if self.extended:
                    self.updated.wait()
                    fresh = _activate_phase(g.offsets, g.neighbors, est, active, upd_node,
                                            upd_new, upd_old, nu)
                self.activated[w] = fresh
                self.boundary.wait()
                if not self.go_on or self.switch:
                    return
        except threading.BrokenBarrierError:
            pass
        except BaseException as exc:
            self._errors.append(exc)
            for b in (self.processed, self.updated, self.boundary):
                b.abort()

    def run(self) -> np.ndarray:
        if self.conv:
            self.conv.observe(self.report, self.est, len(self.est))
        if self.g.node_count:
            workers = [
                threading.Thread(target=self._worker, args=(w,), name=f"fastk-{w}", daemon=True)
                for w in range(self.threads)
            ]
            for t in workers:
                t.start()
            for t in workers:
                t.join()
            if self._errors:
                raise self._errors[0]
        if self.switch:
            self.report.tail_pops = sequential_tail(self.g, self.est, self.active,
                                                    extended=self.extended)
            if self.conv and self.report.tail_pops:
                self.conv.observe(self.report, self.est, 0)
        return self.est


def fastk_run(
    g: Graph,
    threads: int = 16,
    batch: int = DEFAULT_BATCH,
    opts: OptimizationFlags | None = None,
    *,
    truth=None,
    check_activation: bool = False,
) -> tuple[CorenessResult, RunReport]:
    """Compute coreness with ``threads`` workers over shared estimates.

    ``opts.extended_notify`` picks the tighter activation rule
    (:func:`should_notify`) over the plain ``est[v] > new`` test.
    ``opts.hybrid_tail`` hands over to a sequential priority queue once
    fewer than ``batch`` nodes are active. ``check_activation`` verifies at
    every iteration boundary that no inactive node could still drop, and
    counts failures in ``RunReport.activation_violations``.
    """
    check_parallel_config(threads, batch)
    opts = opts or OptimizationFlags()
    report = RunReport("fastk", phase_mode="three-barrier" if opts.extended_notify else "two-barrier")
    conv = Convergence(truth) if truth is not None else None
    est = _FastKRun(g, threads, batch, opts, report, conv, check_activation).run()
    return CorenessResult(est), report
