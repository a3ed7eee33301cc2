"""``kcore-bench`` command line: run | sweep | trace | fetch | verify.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O or input
format error, 3 a result differs from the oracle.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..graph import EdgeListError, load_edge_list
from ..options import ConfigError, OptimizationFlags
from ..oracle import peel_coreness, verify
from ..parallelk import Strategy
from .datasets import MANIFEST, fetch_datasets
from .runner import (
    ALGORITHMS, ROW_FIELDS, SWEEP_FIELDS, TRACE_FIELDS, RunConfig, VerificationError,
    convergence_trace, graph_name, read_coreness, run, sweep, write_coreness, write_csv,
    write_mismatches,
)

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_MISMATCH = 0, 1, 2, 3

log = logging.getLogger("kcore.bench")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is our I/O code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "on", "yes"):
        return True
    if t in ("0", "false", "off", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def _engine_options(p: argparse.ArgumentParser, *, reps: bool = True) -> None:
    p.add_argument("--input", type=Path, required=True, help="edge list (plain or gzip)")
    p.add_argument("--algo", choices=ALGORITHMS, default="fastk")
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.DEDICATED.value)
    p.add_argument("--threads", type=_int_list, default=[16], metavar="LIST")
    p.add_argument("--batch", type=_int_list, default=[256], metavar="N")
    if reps:
        p.add_argument("--reps", type=int, default=5)
    p.add_argument("--no-verify", action="store_true")
    defaults = OptimizationFlags()
    for name in ("selective_send", "single_round", "extended_notify", "hybrid_tail",
                 "sorted_neighbors"):
        p.add_argument("--" + name.replace("_", "-"), type=_bool, metavar="BOOL",
                       default=getattr(defaults, name))
    p.add_argument("--trace-convergence", action="store_true")
    p.add_argument("--check-activation", action="store_true",
                   help="fastk: check at every boundary that no inactive node can still drop")
    p.add_argument("--count-messages", action="store_true")
    p.add_argument("--out", type=Path, help="output CSV (default stdout)")
    p.add_argument("--format", choices=["csv"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kcore-bench", description="k-core decomposition benchmarks")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="time an engine R times and emit one row per repetition")
    _engine_options(p)
    p.add_argument("--trace-out", type=Path, help="per-iteration trace CSV (with --trace-convergence)")
    p.add_argument("--coreness-out", type=Path, help="write node,coreness CSV")

    p = sub.add_parser("sweep", help="one run per threads or batch value")
    _engine_options(p)
    p.add_argument("--axis", choices=["threads", "batch"], default="threads")

    p = sub.add_parser("trace", help="per-iteration mean error and active fraction")
    _engine_options(p, reps=False)

    p = sub.add_parser("fetch", help="download SNAP graphs")
    p.add_argument("names", nargs="*", metavar="NAME",
                   help=f"any of: {', '.join(MANIFEST)}")
    p.add_argument("--all", action="store_true")
    p.add_argument("--dest", type=Path, help="target directory (default $KCORE_DATA or ./data)")
    p.add_argument("--no-check", action="store_true", help="skip the count check")

    p = sub.add_parser("verify", help="compare an engine run or a coreness file with the oracle")
    _engine_options(p, reps=False)
    p.add_argument("--coreness", type=Path, help="coreness CSV to check instead of running")
    return parser


def _config(args, threads: int, batch: int, reps: int = 1) -> RunConfig:
    flags = OptimizationFlags(
        sorted_neighbors=args.sorted_neighbors, single_round=args.single_round,
        selective_send=args.selective_send, extended_notify=args.extended_notify,
        hybrid_tail=args.hybrid_tail)
    return RunConfig(
        algorithm=args.algo, strategy=args.strategy, threads=threads, batch=batch, reps=reps,
        flags=flags, trace_convergence=args.trace_convergence,
        check_activation=args.check_activation, count_messages=args.count_messages,
        input=args.input, out=args.out, verify=not args.no_verify)


def _single(values: list[int], flag: str) -> int:
    if len(values) != 1:
        raise UsageError(f"{flag} takes a single value here")
    return values[0]


def _cmd_run(args) -> int:
    g = load_edge_list(args.input)
    name = graph_name(args.input)
    rows = []
    last = None
    for t in args.threads:
        for b in args.batch:
            last = run(_config(args, t, b, args.reps), g, name=name)
            rows.extend(last.rows)
            if last.report.activation_violations:
                log.error("%d activation violations", last.report.activation_violations)
    write_csv(rows, ROW_FIELDS, args.out or sys.stdout)
    if args.trace_out and last is not None:
        write_csv([s._asdict() for s in last.report.trace], TRACE_FIELDS, args.trace_out)
    if args.coreness_out and last is not None:
        write_coreness(args.coreness_out, g, last.coreness)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if args.axis == "threads":
        values = args.threads
        template = _config(args, values[0], _single(args.batch, "--batch"), args.reps)
    else:
        values = args.batch
        template = _config(args, _single(args.threads, "--threads"), values[0], args.reps)
    res = sweep(template, args.axis, values)
    write_csv(res.rows, SWEEP_FIELDS, args.out or sys.stdout)
    for v, exc in res.failures:
        print(f"{args.axis}={v}: {exc}", file=sys.stderr)
    if any(isinstance(e, VerificationError) for _, e in res.failures):
        return EXIT_MISMATCH
    if any(isinstance(e, OSError) for _, e in res.failures):
        return EXIT_IO
    return EXIT_USAGE if res.failures else EXIT_OK


def _cmd_trace(args) -> int:
    cfg = _config(args, _single(args.threads, "--threads"), _single(args.batch, "--batch"))
    rows, report = convergence_trace(cfg)
    write_csv(rows, TRACE_FIELDS, args.out or sys.stdout)
    if report.monotone_violations or report.soundness_violations:
        log.error("estimate increased %d times, fell below coreness %d times",
                  report.monotone_violations, report.soundness_violations)
        return EXIT_MISMATCH
    return EXIT_OK


def _cmd_fetch(args) -> int:
    names = list(MANIFEST) if args.all else args.names
    results = fetch_datasets(names, args.dest, verify_counts=not args.no_check)
    for r in results:
        status = "ok" if r.ok else f"failed: {r.error}"
        print(f"{r.name}\t{r.path or ''}\t{status}")
    return EXIT_OK if all(r.ok for r in results) else EXIT_IO


def _cmd_verify(args) -> int:
    g = load_edge_list(args.input)
    truth = peel_coreness(g)
    if args.coreness is not None:
        try:
            candidate = read_coreness(args.coreness, g)
        except ValueError as exc:
            raise EdgeListError(0, "", str(exc)) from exc
        bad = verify(candidate, truth)
        if bad:
            path = Path(f"{args.coreness}.mismatch.csv")
            write_mismatches(path, g, bad)
            raise VerificationError(bad, path)
    else:
        cfg = _config(args, _single(args.threads, "--threads"), _single(args.batch, "--batch"))
        run(cfg, g, truth, graph_name(args.input))
    print(f"{graph_name(args.input)}: ok, k_max {truth.k_max}")
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "trace": _cmd_trace,
            "fetch": _cmd_fetch, "verify": _cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"kcore-bench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationError as exc:
        print(f"kcore-bench: verification failed: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (OSError, EdgeListError) as exc:
        print(f"kcore-bench: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
