"""Leveled edge storage.

Each edge carries an integer level that only ever increases, capped at
floor(log2 n). Per endpoint the incident edges are grouped by level so a
single group can be enumerated without touching edges of other levels.
The group table is a plain insertion-ordered mapping; anything with
logarithmic-or-better lookup would do, and iteration order must be
deterministic because replacement searches consume groups in order.

A single writer is assumed; no operation here is safe to call concurrently.
"""

from __future__ import annotations

from collections.abc import Iterator

from .counters import Counters
from .errors import (
    DuplicateEdge,
    LevelOverflow,
    NoSuchEdge,
    SelfLoop,
    VertexOutOfRange,
)

MAX_VERTICES = 1 << 32

EdgeKey = tuple[int, int]


class EdgeRecord:
    """One stored edge: normalized endpoint pair plus its current level."""

    __slots__ = ("u", "v", "level")

    def __init__(self, u: int, v: int, level: int) -> None:
        self.u = u
        self.v = v
        self.level = level

    @property
    def key(self) -> EdgeKey:
        return (self.u, self.v)

    def other(self, x: int) -> int:
        return self.v if x == self.u else self.u

    def __repr__(self) -> str:  # pragma: no cover
        return f"EdgeRecord({self.u}, {self.v}, level={self.level})"


def edge_key(u: int, v: int) -> EdgeKey:
    return (u, v) if u < v else (v, u)


class GraphStore:
    """Adjacency bookkeeping for a graph on a fixed vertex set."""

    __slots__ = ("n", "lmax", "edges", "groups", "counters")

    def __init__(self, n: int, lmax: int, counters: Counters | None = None) -> None:
        if not 1 <= n <= MAX_VERTICES:
            raise VertexOutOfRange(f"vertex count {n} out of range")
        self.n = n
        self.lmax = lmax
        self.edges: dict[EdgeKey, EdgeRecord] = {}
        # per vertex: level -> {edge key: True}; levels appear in first-use order
        self.groups: list[dict[int, dict[EdgeKey, bool]]] = [dict() for _ in range(n)]
        self.counters = counters if counters is not None else Counters()

    def check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise VertexOutOfRange(f"vertex {v} out of range 0..{self.n - 1}")

    # -- mutations ---------------------------------------------------------

    def insert_edge(self, u: int, v: int) -> EdgeRecord:
        """Insert edge (u, v) at level 0 and return its record."""
        self.check_vertex(u)
        self.check_vertex(v)
        if u == v:
            raise SelfLoop(f"self loop at vertex {u}")
        key = edge_key(u, v)
        if key in self.edges:
            raise DuplicateEdge(f"edge {key} already present")
        rec = EdgeRecord(key[0], key[1], 0)
        self.edges[key] = rec
        self._group(key[0], 0)[key] = True
        self._group(key[1], 0)[key] = True
        return rec

    def delete_edge(self, u: int, v: int) -> EdgeRecord:
        """Remove edge (u, v) and return the record it held (final level intact)."""
        self.check_vertex(u)
        self.check_vertex(v)
        key = edge_key(u, v)
        rec = self.edges.pop(key, None)
        if rec is None:
            raise NoSuchEdge(f"no edge {key}")
        self._ungroup(key[0], rec.level, key)
        self._ungroup(key[1], rec.level, key)
        return rec

    def promote_edge(self, key: EdgeKey) -> int:
        """Raise the edge's level by one and return the new level."""
        rec = self.edges.get(key)
        if rec is None:
            raise NoSuchEdge(f"no edge {key}")
        if rec.level >= self.lmax:
            raise LevelOverflow(f"edge {key} already at level {rec.level}")
        old = rec.level
        rec.level = old + 1
        self._ungroup(rec.u, old, key)
        self._ungroup(rec.v, old, key)
        self._group(rec.u, rec.level)[key] = True
        self._group(rec.v, rec.level)[key] = True
        self.counters.promotions += 1
        return rec.level

    # -- queries -----------------------------------------------------------

    def level_of(self, u: int, v: int) -> int:
        rec = self.edges.get(edge_key(u, v))
        if rec is None:
            raise NoSuchEdge(f"no edge ({u}, {v})")
        return rec.level

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.edges

    def edges_at_level(self, v: int, level: int) -> tuple[EdgeKey, ...]:
        self.check_vertex(v)
        group = self.groups[v].get(level)
        return tuple(group) if group else ()

    def has_edges_at_level(self, v: int, level: int) -> bool:
        group = self.groups[v].get(level)
        return bool(group)

    def iter_group(self, v: int, level: int) -> Iterator[EdgeKey]:
        group = self.groups[v].get(level)
        if group:
            yield from group

    def incident_levels_mask(self, v: int) -> int:
        mask = 0
        for level, group in self.groups[v].items():
            if group:
                mask |= 1 << level
        return mask

    def degree(self, v: int) -> int:
        return sum(len(g) for g in self.groups[v].values())

    def edge_count(self) -> int:
        return len(self.edges)

    def all_edges(self) -> tuple[EdgeKey, ...]:
        return tuple(self.edges)

    # -- internals ---------------------------------------------------------

    def _group(self, v: int, level: int) -> dict[EdgeKey, bool]:
        table = self.groups[v]
        group = table.get(level)
        if group is None:
            group = {}
            table[level] = group
        return group

    def _ungroup(self, v: int, level: int, key: EdgeKey) -> None:
        table = self.groups[v]
        group = table[level]
        del group[key]
        if not group:
            del table[level]
