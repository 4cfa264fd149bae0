"""Workload files: parsing, formatting, and seeded generation.

A workload is a plain-text trace. The first significant line is ``n <N>``,
then one line per operation: ``I u v`` inserts an edge, ``D u v`` deletes
one, ``Q u v`` asks whether u and v are connected. Lines starting with
``#`` and blank lines are skipped. Generation is deterministic for a fixed
seed so traces can be diffed across runs and variants.
"""

from __future__ import annotations

import random

from .errors import WorkloadError

Op = tuple[str, int, int]

TOPOLOGIES = ("random", "path", "cycle", "cliques-with-bridges")


def parse_workload(text: str) -> tuple[int, list[Op]]:
    """Parse a trace; raises WorkloadError with the offending line number."""
    n: int | None = None
    ops: list[Op] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise WorkloadError("expected header 'n <N>'", line_no)
            try:
                n = int(parts[1])
            except ValueError:
                raise WorkloadError(f"bad vertex count {parts[1]!r}", line_no)
            if n < 1:
                raise WorkloadError("vertex count must be positive", line_no)
            continue
        if len(parts) != 3 or parts[0] not in ("I", "D", "Q"):
            raise WorkloadError(f"expected 'I|D|Q u v', got {line!r}", line_no)
        try:
            u, v = int(parts[1]), int(parts[2])
        except ValueError:
            raise WorkloadError(f"bad vertex in {line!r}", line_no)
        ops.append((parts[0], u, v))
    if n is None:
        raise WorkloadError("empty workload: missing 'n <N>' header")
    return n, ops


def format_workload(n: int, ops: list[Op], comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"n {n}")
    lines.extend(f"{op} {u} {v}" for op, u, v in ops)
    return "\n".join(lines) + "\n"


class _EdgePool:
    """Present-edge set with O(1) uniform sampling and removal."""

    __slots__ = ("items", "index")

    def __init__(self) -> None:
        self.items: list[tuple[int, int]] = []
        self.index: dict[tuple[int, int], int] = {}

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, key: tuple[int, int]) -> bool:
        return key in self.index

    def add(self, key: tuple[int, int]) -> None:
        self.index[key] = len(self.items)
        self.items.append(key)

    def remove(self, key: tuple[int, int]) -> None:
        i = self.index.pop(key)
        last = self.items.pop()
        if last != key:
            self.items[i] = last
            self.index[last] = i

    def sample(self, rng: random.Random) -> tuple[int, int]:
        return self.items[rng.randrange(len(self.items))]


def _prologue(n: int, topology: str) -> list[Op]:
    if topology == "random":
        return []
    if topology == "path":
        return [("I", i, i + 1) for i in range(n - 1)]
    if topology == "cycle":
        ops = [("I", i, i + 1) for i in range(n - 1)]
        if n > 2:
            ops.append(("I", 0, n - 1))
        return ops
    if topology == "cliques-with-bridges":
        size = max(3, int(n**0.5))
        ops: list[Op] = []
        starts = list(range(0, n, size))
        for s in starts:
            group = range(s, min(s + size, n))
            for a in group:
                for b in group:
                    if a < b:
                        ops.append(("I", a, b))
        for prev, cur in zip(starts, starts[1:]):
            ops.append(("I", prev, cur))  # one bridge per consecutive pair
        return ops
    raise WorkloadError(f"unknown topology {topology!r}")


def generate_workload(
    seed: int,
    n: int,
    ops: int,
    mix: tuple[float, float, float] = (0.4, 0.3, 0.3),
    topology: str = "random",
) -> tuple[int, list[Op]]:
    """Build a deterministic trace; returns (n, ops).

    The topology contributes opening inserts (counted against ``ops``);
    the remainder is sampled from ``mix``. Deletes pick uniformly among
    present edges; inserts among absent pairs. When the graph is saturated
    (or empty, for a delete) the op degrades to a query so the trace always
    has exactly ``ops`` operations.
    """
    p_ins, p_del, p_qry = mix
    if min(p_ins, p_del, p_qry) < 0 or abs(p_ins + p_del + p_qry - 1.0) > 1e-9:
        raise WorkloadError(f"mix must be three probabilities summing to 1, got {mix}")
    if n < 1:
        raise WorkloadError("vertex count must be positive")
    rng = random.Random(seed)
    pool = _EdgePool()
    out: list[Op] = []
    for op in _prologue(n, topology)[:ops]:
        pool.add((op[1], op[2]))
        out.append(op)
    full = n * (n - 1) // 2
    while len(out) < ops:
        r = rng.random()
        if r < p_ins and len(pool) < full:
            for _ in range(64):
                u = rng.randrange(n)
                v = rng.randrange(n)
                if u == v:
                    continue
                key = (min(u, v), max(u, v))
                if key not in pool:
                    pool.add(key)
                    out.append(("I", key[0], key[1]))
                    break
            else:
                # dense graph: rejection gave up, degrade to a query
                u = rng.randrange(n)
                v = rng.randrange(n)
                out.append(("Q", u, v))
        elif r < p_ins + p_del and len(pool) > 0:
            key = pool.sample(rng)
            pool.remove(key)
            out.append(("D", key[0], key[1]))
        else:
            u = rng.randrange(n)
            v = rng.randrange(n)
            out.append(("Q", u, v))
    return n, out
