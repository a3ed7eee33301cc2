"""Timed engine runs, sweeps and convergence traces producing tidy CSV rows."""

from __future__ import annotations

import csv
import dataclasses
import io
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..fastk import fastk_run
from ..graph import Graph, load_edge_list
from ..kernel import sequentialk_run
from ..options import ConfigError, OptimizationFlags
from ..oracle import CorenessResult, Mismatch, peel_coreness, verify
from ..parallelk import Strategy, parallelk_run
from ..report import RunReport

ALGORITHMS = ("sequentialk", "parallelk", "fastk", "oracle")

ROW_FIELDS = (
    "graph", "algo", "strategy", "threads", "batch",
    "sorted_neighbors", "single_round", "selective_send", "extended_notify", "hybrid_tail",
    "instrumented", "phase_mode", "rep", "seconds", "iterations", "messages",
    "tail_pops", "k_max", "verified",
)
TRACE_FIELDS = ("iteration", "mean_error", "active_fraction")


class VerificationError(RuntimeError):
    def __init__(self, mismatches: list[Mismatch], report_path: Path | None = None):
        self.mismatches = mismatches
        self.report_path = report_path
        where = f", see {report_path}" if report_path else ""
        super().__init__(f"{len(mismatches)} nodes differ from the oracle{where}")


@dataclass
class RunConfig:
    algorithm: str = "fastk"
    strategy: str = Strategy.DEDICATED.value
    threads: int = 16
    batch: int = 256
    reps: int = 5
    flags: OptimizationFlags = field(default_factory=OptimizationFlags)
    trace_convergence: bool = False
    check_activation: bool = False
    count_messages: bool = False
    input: Path | None = None
    out: Path | None = None
    verify: bool = True

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        Strategy(self.strategy)
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if self.threads < 1 or self.batch < 1:
            raise ConfigError("threads and batch must be at least 1")

    @property
    def instrumented(self) -> bool:
        return self.trace_convergence or self.check_activation or self.count_messages


@dataclass
class BenchResult:
    config: RunConfig
    report: RunReport
    coreness: CorenessResult
    rows: list[dict]


def graph_name(path: str | os.PathLike | None) -> str:
    if path is None:
        return ""
    name = Path(path).name
    for suffix in (".gz", ".txt"):
        name = name.removesuffix(suffix)
    return name


def run_engine(g: Graph, cfg: RunConfig, truth: CorenessResult | None = None
               ) -> tuple[CorenessResult, RunReport]:
    """One untimed-overhead call of the configured engine."""
    trace_truth = truth if cfg.trace_convergence else None
    if cfg.algorithm == "oracle":
        return peel_coreness(g), RunReport("oracle")
    if cfg.algorithm == "sequentialk":
        return sequentialk_run(g, truth=trace_truth)
    if cfg.algorithm == "parallelk":
        return parallelk_run(g, cfg.threads, cfg.batch, cfg.strategy, cfg.flags, truth=trace_truth)
    return fastk_run(g, cfg.threads, cfg.batch, cfg.flags, truth=trace_truth,
                     check_activation=cfg.check_activation)


def write_mismatches(path: Path, g: Graph, mismatches: list[Mismatch]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(("node", "dense_id", "candidate", "truth"))
        for m in mismatches:
            w.writerow((int(g.labels[m.node]), m.node, m.candidate, m.truth))


def _mismatch_path(cfg: RunConfig) -> Path:
    base = cfg.out if cfg.out is not None else Path(graph_name(cfg.input) or "run")
    return Path(f"{base}.mismatch.csv")


_WARM = Graph.from_edges([(0, 1), (1, 2), (2, 0), (2, 3)])
_warmed: set[tuple] = set()


def warm_up(cfg: RunConfig) -> None:
    """Run the engine once on a tiny graph so JIT loading stays out of the timings."""
    key = (cfg.algorithm, cfg.strategy, cfg.flags)
    if key not in _warmed:
        run_engine(_WARM, dataclasses.replace(cfg, threads=min(cfg.threads, 2),
                                              trace_convergence=False, check_activation=False))
        _warmed.add(key)


def run(cfg: RunConfig, graph: Graph | None = None, truth: CorenessResult | None = None,
        name: str | None = None) -> BenchResult:
    """Run the configured engine ``cfg.reps`` times over one loaded graph.

    Only the engine call is timed; loading and the oracle are excluded.
    Each repetition is checked against the oracle unless ``cfg.verify`` is off,
    and must reproduce the previous repetition's coreness exactly.
    """
    g = graph if graph is not None else load_edge_list(cfg.input)
    name = name if name is not None else graph_name(cfg.input)
    if truth is None and (cfg.verify or cfg.trace_convergence):
        truth = peel_coreness(g)
    warm_up(cfg)
    rows = []
    seconds = []
    first = None
    report = None
    for rep in range(cfg.reps):
        t0 = time.perf_counter()
        result, report = run_engine(g, cfg, truth)
        dt = time.perf_counter() - t0
        seconds.append(dt)
        verified = ""
        if cfg.verify:
            bad = verify(result, truth)
            if bad:
                path = _mismatch_path(cfg)
                write_mismatches(path, g, bad)
                raise VerificationError(bad, path)
            verified = "true"
        if first is None:
            first = result
        elif first != result:
            raise VerificationError(verify(result, first))
        rows.append(_row(name, cfg, report, rep, dt, result, verified))
    report.seconds = seconds
    return BenchResult(cfg, report, first, rows)


def _row(name, cfg: RunConfig, report: RunReport, rep, seconds, result, verified) -> dict:
    f = cfg.flags
    messages = ""
    if cfg.count_messages and report.messages_sent is not None:
        messages = report.messages_sent
    return {
        "graph": name,
        "algo": cfg.algorithm,
        "strategy": cfg.strategy if cfg.algorithm == "parallelk" else "",
        "threads": cfg.threads if cfg.algorithm in ("parallelk", "fastk") else 1,
        "batch": cfg.batch,
        "sorted_neighbors": f.sorted_neighbors,
        "single_round": f.single_round,
        "selective_send": f.selective_send,
        "extended_notify": f.extended_notify,
        "hybrid_tail": f.hybrid_tail,
        "instrumented": cfg.instrumented,
        "phase_mode": report.phase_mode,
        "rep": rep,
        "seconds": f"{seconds:.6f}",
        "iterations": report.iterations,
        "messages": messages,
        "tail_pops": report.tail_pops if cfg.algorithm == "fastk" else "",
        "k_max": result.k_max,
        "verified": verified,
    }


@dataclass
class SweepResult:
    rows: list[dict]
    failures: list[tuple[int, BaseException]]


def sweep(template: RunConfig, axis: str, values: Sequence[int], graph: Graph | None = None
          ) -> SweepResult:
    """One :func:`run` per axis value over the same graph, summarized per point.

    A failing point is recorded and the remaining points still run. On the
    threads axis each row carries ``speedup = time(T_min) / time(T)``.
    """
    if axis not in ("threads", "batch"):
        raise ConfigError(f"unknown sweep axis {axis!r}")
    if not values:
        raise ConfigError("sweep needs at least one axis value")
    g = graph if graph is not None else load_edge_list(template.input)
    truth = peel_coreness(g) if template.verify or template.trace_convergence else None
    points = []
    failures = []
    for v in values:
        try:
            cfg = dataclasses.replace(template, **{axis: v})
            res = run(cfg, g, truth, graph_name(template.input))
        except Exception as exc:  # noqa: BLE001 - summarized by the caller
            failures.append((v, exc))
            continue
        row = dict(res.rows[-1])
        row.pop("rep")
        row["seconds"] = f"{res.report.mean_seconds:.6f}"
        row["reps"] = cfg.reps
        points.append((v, res.report.mean_seconds, row))
    rows = []
    base = min(points, key=lambda p: p[0])[1] if points else None
    for v, secs, row in points:
        row["speedup"] = f"{base / secs:.4f}" if axis == "threads" and secs > 0 else ""
        rows.append(row)
    return SweepResult(rows, failures)


SWEEP_FIELDS = tuple(f for f in ROW_FIELDS if f != "rep") + ("reps", "speedup")


def convergence_trace(cfg: RunConfig, graph: Graph | None = None) -> tuple[list[dict], RunReport]:
    """Per-iteration mean error and active fraction of one instrumented run."""
    g = graph if graph is not None else load_edge_list(cfg.input)
    truth = peel_coreness(g)
    cfg = dataclasses.replace(cfg, trace_convergence=True)
    result, report = run_engine(g, cfg, truth)
    if cfg.verify:
        bad = verify(result, truth)
        if bad:
            path = _mismatch_path(cfg)
            write_mismatches(path, g, bad)
            raise VerificationError(bad, path)
    rows = [{"iteration": s.iteration, "mean_error": s.mean_error,
             "active_fraction": s.active_fraction} for s in report.trace]
    return rows, report


def write_csv(rows: Iterable[dict], fields: Sequence[str], dest=None) -> str | None:
    """Write ``rows`` with a header to ``dest`` (path or stream), or return the text."""
    buf = io.StringIO() if dest is None else None
    if dest is None or hasattr(dest, "write"):
        f = buf if dest is None else dest
        _write(f, rows, fields)
        return buf.getvalue() if buf is not None else None
    with open(dest, "w", newline="", encoding="utf-8") as f:
        _write(f, rows, fields)
    return None


def _write(f, rows, fields):
    w = csv.DictWriter(f, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)


def write_coreness(path, g: Graph, result: CorenessResult) -> None:
    """Store coreness as ``node,coreness,dense_id`` keyed by the original node id."""
    data = np.column_stack([g.labels, result.coreness, np.arange(g.node_count)])
    np.savetxt(path, data, fmt="%d", delimiter=",", header="node,coreness,dense_id", comments="")


def read_coreness(path, g: Graph) -> CorenessResult:
    """Load a coreness CSV written by :func:`write_coreness` back into dense order."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    out = np.full(g.node_count, -1, dtype=np.int32)
    if len(data):
        order = np.argsort(g.labels, kind="stable")
        pos = np.searchsorted(g.labels, data[:, 0], sorter=order)
        pos = np.minimum(pos, max(g.node_count - 1, 0))
        dense = order[pos] if g.node_count else pos
        ok = g.labels[dense] == data[:, 0] if g.node_count else np.zeros(len(data), bool)
        if not ok.all():
            raise ValueError(f"unknown node id {int(data[~ok][0, 0])} in {path}")
        out[dense] = data[:, 1]
    return CorenessResult(out)
