"""ParallelK: the message protocol run by several threads over per-node mailboxes.

Three ways of driving the same node kernels:

* ``DEDICATED``: T long-lived workers plus the calling thread as coordinator,
  all meeting on barriers of T+1 parties. Workers claim batches of B nodes
  from a shared atomic cursor.
* ``TASK_POOL``: each phase submits one task per batch of B nodes to a pool.
* ``DATA_PARALLEL``: each phase splits the node range into T equal slices
  (B is not used).
"""

from __future__ import annotations

import enum
import threading

import numpy as np

from .forkjoin import ForkJoin
from .graph import Graph
from .kernel.mail import CHANGED, N_STATS, OVERFLOW, RECEIVED, SENT, SUPPRESSED, MessageMail
from .options import OptimizationFlags, check_parallel_config
from .oracle import CorenessResult
from .report import Convergence, RunReport

DEFAULT_BATCH = 256


class Strategy(str, enum.Enum):
    DATA_PARALLEL = "data-parallel"
    TASK_POOL = "task-pool"
    DEDICATED = "dedicated"


def worker_process_phase(mail: MessageMail, lo: int, hi: int, counts=None, stats=None) -> bool:
    """Process nodes ``lo..hi-1``; returns whether any of their estimates dropped."""
    counts = mail.scratch() if counts is None else counts
    stats = mail.new_stats() if stats is None else stats
    return mail.process(lo, hi, counts, stats)


def worker_send_phase(mail: MessageMail, lo: int, hi: int, stats=None) -> None:
    mail.send(lo, hi, mail.new_stats() if stats is None else stats)


class _DedicatedRun:
    def __init__(self, mail: MessageMail, threads: int, batch: int, report: RunReport,
                 conv: Convergence | None):
        self.mail = mail
        self.threads = threads
        self.batch = batch
        self.report = report
        self.conv = conv
        self.stats = np.zeros((threads, N_STATS), dtype=np.int64)
        self.go_on = True
        self._started = False
        self._errors: list[BaseException] = []
        parties = threads + 1
        self.mid = threading.Barrier(parties, action=self._rewind)
        self.end = threading.Barrier(parties, action=self._iteration_end)

    def _rewind(self) -> None:
        self.mail.cursor[0] = 0

    def _iteration_end(self) -> None:
        # runs on one party while the rest are held at the barrier
        self.mail.cursor[0] = 0
        if not self._started:
            self._started = True
        else:
            self.go_on = bool(self.stats[:, CHANGED].any())
            self.stats[:, CHANGED] = 0
            self.report.iterations += 1
        if self.conv:
            self.conv.observe(self.report, self.mail.core, self.mail.active_count())

    def _worker(self, w: int) -> None:
        mail, batch, stats = self.mail, self.batch, self.stats[w]
        counts = mail.scratch()
        try:
            mail.send_claimed(batch, stats)
            self.end.wait()
            while True:
                mail.process_claimed(batch, counts, stats)
                if not mail.fused:
                    self.mid.wait()
                    mail.send_claimed(batch, stats)
                self.end.wait()
                # go_on was fixed by the barrier action before anyone was released
                if not self.go_on:
                    return
        except threading.BrokenBarrierError:
            pass
        except BaseException as exc:
            self._errors.append(exc)
            self.mid.abort()
            self.end.abort()

    def run(self) -> np.ndarray:
        workers = [
            threading.Thread(target=self._worker, args=(w,), name=f"parallelk-{w}", daemon=True)
            for w in range(self.threads)
        ]
        for t in workers:
            t.start()
        try:
            self.end.wait()
            while True:
                if not self.mail.fused:
                    self.mid.wait()
                self.end.wait()
                if not self.go_on:
                    break
        except threading.BrokenBarrierError:
            pass
        finally:
            for t in workers:
                t.join()
        if self._errors:
            raise self._errors[0]
        return self.stats.sum(axis=0)


def _run_forkjoin(mail: MessageMail, threads: int, ranges: list[tuple[int, int]],
                  report: RunReport, conv: Convergence | None) -> np.ndarray:
    with ForkJoin(threads) as fj:
        def state():
            return fj.local(lambda: (mail.scratch(), mail.new_stats()))

        def process(r):
            counts, stats = state()
            return mail.process(r[0], r[1], counts, stats)

        def send(r):
            mail.send(r[0], r[1], state()[1])

        fj.run(send, ranges)
        if conv:
            conv.observe(report, mail.core, mail.active_count())
        while True:
            changed = any(fj.run(process, ranges))
            if changed and not mail.fused:
                fj.run(send, ranges)
            report.iterations += 1
            if conv:
                conv.observe(report, mail.core, mail.active_count())
            if not changed:
                break
        rows = [s for _, s in fj.locals()]
    return np.sum(rows, axis=0) if rows else np.zeros(N_STATS, dtype=np.int64)


def _ranges(n: int, step: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + step, n)) for lo in range(0, n, step)]


def parallelk_run(
    g: Graph,
    threads: int = 16,
    batch: int = DEFAULT_BATCH,
    strategy: Strategy | str = Strategy.DEDICATED,
    opts: OptimizationFlags | None = None,
    *,
    truth=None,
) -> tuple[CorenessResult, RunReport]:
    """Compute coreness with ``threads`` workers exchanging messages.

    Iterations alternate a process phase (drain mailboxes, recompute) and a
    send phase, separated by barriers. With ``opts.single_round`` a node
    sends as soon as its estimate drops and each iteration has one phase.
    With ``opts.selective_send`` a message to a neighbor whose last reported
    estimate is not above the sender's is dropped.
    """
    check_parallel_config(threads, batch)
    strategy = Strategy(strategy)
    opts = opts or OptimizationFlags()
    mail = MessageMail(g, fused=opts.single_round, selective=opts.selective_send,
                       sorted_neighbors=opts.sorted_neighbors)
    report = RunReport("parallelk", phase_mode="single-round" if opts.single_round else "two-phase")
    conv = Convergence(truth) if truth is not None else None
    n = g.node_count

    if strategy is Strategy.DEDICATED:
        totals = _DedicatedRun(mail, threads, batch, report, conv).run()
    elif strategy is Strategy.TASK_POOL:
        totals = _run_forkjoin(mail, threads, _ranges(n, batch), report, conv)
    else:
        step = max(1, -(-n // threads))
        totals = _run_forkjoin(mail, threads, _ranges(n, step), report, conv)

    if totals[OVERFLOW]:
        raise RuntimeError("mailbox overflow")
    report.messages_sent = int(totals[SENT])
    report.messages_suppressed = int(totals[SUPPRESSED])
    report.messages_received = int(totals[RECEIVED])
    return CorenessResult(mail.core), report


def single_round_variant(g: Graph, threads: int = 16, batch: int = DEFAULT_BATCH,
                         **kwargs) -> tuple[CorenessResult, RunReport]:
    """ParallelK with the process and send phases fused into one."""
    base = kwargs.pop("opts", None) or OptimizationFlags()
    opts = OptimizationFlags(**{**base.__dict__, "single_round": True})
    return parallelk_run(g, threads, batch, opts=opts, **kwargs)
