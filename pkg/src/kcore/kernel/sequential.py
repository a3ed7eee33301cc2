"""SequentialK: the message protocol simulated in synchronous rounds on one thread."""

from __future__ import annotations

from ..graph import Graph
from ..oracle import CorenessResult
from ..report import Convergence, RunReport
from .mail import OVERFLOW, RECEIVED, SENT, MessageMail


def sequentialk_run(g: Graph, *, truth=None) -> tuple[CorenessResult, RunReport]:
    """Run the protocol to quiescence.

    Every node starts at its degree and announces it. Each round drains all
    mailboxes and recomputes, then every node whose estimate dropped sends
    the new value to all neighbors. Stops after a round without changes.
    Passing ``truth`` turns on convergence tracing.
    """
    mail = MessageMail(g)
    report = RunReport("sequentialk", phase_mode="two-phase")
    n = g.node_count
    stats = mail.new_stats()
    counts = mail.scratch()
    conv = Convergence(truth) if truth is not None else None

    mail.send(0, n, stats)
    if conv:
        conv.observe(report, mail.core, mail.active_count())
    while True:
        changed = mail.process(0, n, counts, stats)
        if changed:
            mail.send(0, n, stats)
        report.iterations += 1
        if conv:
            conv.observe(report, mail.core, mail.active_count())
        if not changed:
            break

    if stats[OVERFLOW]:
        raise RuntimeError("mailbox overflow")
    report.messages_sent = int(stats[SENT])
    report.messages_received = int(stats[RECEIVED])
    return CorenessResult(mail.core), report
