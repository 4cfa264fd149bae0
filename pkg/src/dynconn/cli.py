"""Command-line harness: replay traces, generate them, and benchmark.

Exit codes: 0 success, 2 workload parse error, 3 precondition violation
(self loop, duplicate edge, missing edge, vertex out of range), 4 oracle
mismatch, 5 validator failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from .config import EngineConfig
from .counters import COUNTER_NAMES
from .errors import (
    DuplicateEdge,
    NoSuchEdge,
    SelfLoop,
    VertexOutOfRange,
    WorkloadError,
)
from .search_engine import ConnectivityEngine
from .validation import LabelOracle, validate_engine
from .workload import TOPOLOGIES, Op, format_workload, generate_workload, parse_workload

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_ORACLE = 4
EXIT_VALIDATOR = 5

_PRECONDITION_ERRORS = (SelfLoop, DuplicateEdge, NoSuchEdge, VertexOutOfRange)

STATS_SCHEMA = "# schema=1"


def _engine(n: int, args: argparse.Namespace) -> ConnectivityEngine:
    cfg = EngineConfig(epsilon=args.epsilon, alpha=args.alpha)
    return ConnectivityEngine(n, variant=args.variant, config=cfg)


def _stats_header() -> str:
    return "op_index,op,u,v," + ",".join(COUNTER_NAMES)


def _stats_row(i: int, op: Op, engine: ConnectivityEngine) -> str:
    snap = engine.counters.snapshot()
    head = f"{i},{op[0]},{op[1]},{op[2]}"
    return head + "," + ",".join(str(snap[name]) for name in COUNTER_NAMES)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        if args.file == "-":
            text = sys.stdin.read()
        else:
            with open(args.file, "r", encoding="ascii") as fh:
                text = fh.read()
        n, ops = parse_workload(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except WorkloadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    engine = _engine(n, args)
    oracle = LabelOracle(n) if args.check_oracle else None
    stats_lines: list[str] | None = None
    if args.stats is not None:
        stats_lines = [STATS_SCHEMA, _stats_header()]
    out = sys.stdout

    for i, (op, u, v) in enumerate(ops):
        try:
            if op == "I":
                engine.insert(u, v)
                if oracle is not None:
                    oracle.insert(u, v)
            elif op == "D":
                engine.delete(u, v)
                if oracle is not None:
                    oracle.delete(u, v)
            else:
                got = engine.connected(u, v)
                out.write("1\n" if got else "0\n")
                if oracle is not None and got != oracle.connected(u, v):
                    print(
                        f"error: op {i}: query ({u},{v}) disagrees with oracle",
                        file=sys.stderr,
                    )
                    return EXIT_ORACLE
        except _PRECONDITION_ERRORS as exc:
            print(f"error: op {i}: {op} {u} {v}: {exc}", file=sys.stderr)
            return EXIT_PRECONDITION
        if stats_lines is not None:
            stats_lines.append(_stats_row(i, (op, u, v), engine))
        if args.validate_every and (i + 1) % args.validate_every == 0:
            failures = validate_engine(engine)
            if failures:
                print(f"error: op {i}: validator failures:", file=sys.stderr)
                for line in failures:
                    print(f"  {line}", file=sys.stderr)
                return EXIT_VALIDATOR

    if stats_lines is not None:
        with open(args.stats, "w", encoding="ascii") as fh:
            fh.write("\n".join(stats_lines) + "\n")
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    mix = args.mix
    try:
        n, ops = generate_workload(args.seed, args.n, args.ops, mix, args.topology)
    except WorkloadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    comment = (
        f"seed={args.seed} ops={args.ops} "
        f"mix={mix[0]},{mix[1]},{mix[2]} topology={args.topology}"
    )
    text = format_workload(n, ops, comment=comment)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="ascii") as fh:
            fh.write(text)
    return EXIT_OK


def _bench_one(
    n: int, variant: str, args: argparse.Namespace
) -> tuple[float, float, float]:
    """Mean touched nodes per update / per query and wall seconds per op."""
    _, ops = generate_workload(args.seed, n, args.ops, (0.45, 0.25, 0.30), "random")
    upd_touched = 0.0
    qry_touched = 0.0
    updates = 0
    queries = 0
    elapsed = 0.0
    for _ in range(args.reps):
        cfg = EngineConfig(epsilon=args.epsilon, alpha=args.alpha)
        engine = ConnectivityEngine(n, variant=variant, config=cfg)
        c = engine.counters
        start = time.perf_counter()
        for op, u, v in ops:
            before = c.nodes_touched
            if op == "I":
                engine.insert(u, v)
            elif op == "D":
                engine.delete(u, v)
            else:
                engine.connected(u, v)
            delta = c.nodes_touched - before
            if op == "Q":
                qry_touched += delta
                queries += 1
            else:
                upd_touched += delta
                updates += 1
        elapsed += time.perf_counter() - start
    per_update = upd_touched / updates if updates else 0.0
    per_query = qry_touched / queries if queries else 0.0
    per_op = elapsed / (len(ops) * args.reps) if ops else 0.0
    return per_update, per_query, per_op


def cmd_bench(args: argparse.Namespace) -> int:
    rows = [STATS_SCHEMA, "n,variant,mean_touched_update,mean_touched_query,sec_per_op,growth_ratio"]
    variants = ("simple", "improved") if args.variant == "both" else (args.variant,)
    for variant in variants:
        prev: float | None = None
        for n in args.sizes:
            per_update, per_query, per_op = _bench_one(n, variant, args)
            ratio = "" if prev in (None, 0.0) else f"{per_update / prev:.4f}"
            rows.append(
                f"{n},{variant},{per_update:.4f},{per_query:.4f},{per_op:.8f},{ratio}"
            )
            prev = per_update
    text = "\n".join(rows) + "\n"
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="ascii") as fh:
            fh.write(text)
    return EXIT_OK


def _mix(value: str) -> tuple[float, float, float]:
    parts = value.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("mix must be three comma-separated numbers")
    try:
        a, b, c = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad mix {value!r}")
    return a, b, c


def _sizes(value: str) -> list[int]:
    try:
        return [int(p) for p in value.split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {value!r}")


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", choices=("simple", "improved"), default="improved")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=3.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynconn", description="Fully dynamic connectivity workload harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay a workload file")
    run.add_argument("file", help="workload path, or - for stdin")
    _add_engine_flags(run)
    run.add_argument("--check-oracle", action="store_true")
    run.add_argument("--validate-every", type=int, default=0, metavar="K")
    run.add_argument("--stats", default=None, metavar="CSV")
    run.set_defaults(func=cmd_run)

    gen = sub.add_parser("generate", help="emit a deterministic workload")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--ops", type=int, required=True)
    gen.add_argument("--mix", type=_mix, default=(0.4, 0.3, 0.3))
    gen.add_argument("--topology", choices=TOPOLOGIES, default="random")
    gen.add_argument("--output", "-o", default="-")
    gen.set_defaults(func=cmd_generate)

    bench = sub.add_parser("bench", help="touched-node and wall-clock scaling table")
    bench.add_argument("--sizes", type=_sizes, required=True)
    bench.add_argument("--reps", type=int, default=1)
    bench.add_argument("--ops", type=int, default=20000)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument(
        "--variant", choices=("simple", "improved", "both"), default="both"
    )
    bench.add_argument("--epsilon", type=float, default=0.5)
    bench.add_argument("--alpha", type=float, default=3.0)
    bench.add_argument("--output", "-o", default="-")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
