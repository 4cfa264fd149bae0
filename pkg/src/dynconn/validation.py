"""Ground-truth oracles and the from-scratch structural validator.

The validator recomputes every checkable invariant from the raw edge set
and compares it against the live structure, without mutating anything.
Failures come back as strings prefixed with a family tag (``store:``,
``wiring:``, ``partition:``, ``size-sum:``, ``leaf-levels:``, plus the
variant-specific families) so tests can assert that a deliberate
corruption trips exactly the family it should.
"""

from __future__ import annotations

from collections import deque

from .graph_store import GraphStore
from .nodes import K_CNODE, K_LEAF, KIND_NAMES, Node


def oracle_connected(store: GraphStore, u: int, v: int) -> bool:
    """Plain BFS over the current edges, ignoring levels entirely."""
    if u == v:
        return True
    seen = {u}
    queue = deque((u,))
    while queue:
        x = queue.popleft()
        for group in store.groups[x].values():
            for key in group:
                y = key[0] if key[1] == x else key[1]
                if y == v:
                    return True
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    return False


class UnionFind:
    """Small path-compressing union-find for cross-checks."""

    __slots__ = ("parent",)

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


class LabelOracle:
    """Incremental connectivity mirror, fast enough for million-op runs.

    Queries are label comparisons. Inserts relabel the smaller of two
    joined components; deletes probe with a BFS from one endpoint and
    relabel the split-off side when the edge turns out to be a bridge.
    """

    __slots__ = ("n", "adj", "label", "_next")

    def __init__(self, n: int) -> None:
        self.n = n
        self.adj: list[set[int]] = [set() for _ in range(n)]
        self.label = list(range(n))
        self._next = n

    def connected(self, u: int, v: int) -> bool:
        return u == v or self.label[u] == self.label[v]

    def insert(self, u: int, v: int) -> None:
        self.adj[u].add(v)
        self.adj[v].add(u)
        if self.label[u] == self.label[v]:
            return
        side_u = self._component(u)
        side_v = self._component(v)
        small, tag = (side_u, self.label[v]) if len(side_u) <= len(side_v) else (side_v, self.label[u])
        label = self.label
        for x in small:
            label[x] = tag

    def delete(self, u: int, v: int) -> None:
        adj_u = self.adj[u]
        adj_v = self.adj[v]
        adj_u.discard(v)
        adj_v.discard(u)
        # a surviving common neighbor keeps u-v connected; labels stand
        if not adj_u.isdisjoint(adj_v):
            return
        side = self._component(u)
        if v in side:
            return
        tag = self._next
        self._next = tag + 1
        label = self.label
        for x in side:
            label[x] = tag

    def _component(self, s: int) -> set[int]:
        seen = {s}
        queue = deque((s,))
        adj = self.adj
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return seen


def _pure_cluster_at(leaf: Node, level: int) -> Node:
    """Counter-free twin of vertex_cluster_at for read-only validation."""
    cur = leaf.parent
    while cur is not None:
        if cur.kind == K_CNODE:
            if cur.level == level:
                return cur
            if cur.level < level:
                break
        cur = cur.parent
    return leaf


def validate_engine(engine) -> list[str]:
    """Recompute every invariant from scratch; return failure strings."""
    errors: list[str] = []
    store = engine.store
    forest = engine.forest
    engine.counters.validations += 1

    _check_store(store, errors)
    roots = forest.all_roots()
    nodes = _check_wiring(forest, roots, errors)
    _check_partition(engine, errors)
    _check_sizes(nodes, forest, errors)
    _check_leaf_levels(forest, errors)
    engine.structure.validate_extra(nodes, errors)
    return errors


def _check_store(store: GraphStore, errors: list[str]) -> None:
    for key, rec in store.edges.items():
        if not 0 <= rec.level <= store.lmax:
            errors.append(f"store: edge {key} at level {rec.level} outside 0..{store.lmax}")
        for end in key:
            group = store.groups[end].get(rec.level)
            if not group or key not in group:
                errors.append(f"store: edge {key} missing from vertex {end} level {rec.level}")
    for v, by_level in enumerate(store.groups):
        for level, group in by_level.items():
            if not group:
                errors.append(f"store: vertex {v} keeps an empty level-{level} group")
            for key in group:
                rec = store.edges.get(key)
                if rec is None or rec.level != level:
                    errors.append(f"store: stale entry {key} at vertex {v} level {level}")


def _check_wiring(forest, roots: list[Node], errors: list[str]) -> list[Node]:
    seen_leaves: set[int] = set()
    nodes: list[Node] = []
    for root in roots:
        if root.parent is not None:
            errors.append(f"wiring: root {root.id} has a parent")
        stack = [root]
        while stack:
            cur = stack.pop()
            nodes.append(cur)
            if cur.kind == K_LEAF:
                if cur.left is not None or cur.right is not None:
                    errors.append(f"wiring: leaf {cur.id} has children")
                if cur.vertex in seen_leaves:
                    errors.append(f"wiring: vertex {cur.vertex} reached twice")
                seen_leaves.add(cur.vertex)
                continue
            for kid in (cur.left, cur.right):
                if kid is None:
                    continue
                if kid.parent is not cur:
                    errors.append(
                        f"wiring: {KIND_NAMES[kid.kind]} {kid.id} parent pointer "
                        f"does not return to {cur.id}"
                    )
                stack.append(kid)
    if len(seen_leaves) != forest.params.n:
        errors.append(
            f"wiring: {len(seen_leaves)} of {forest.params.n} vertices reachable from roots"
        )
    return nodes


def _check_partition(engine, errors: list[str]) -> None:
    store = engine.store
    forest = engine.forest
    n = engine.n
    for level in range(engine.params.lmax + 1):
        uf = UnionFind(n)
        for key, rec in store.edges.items():
            if rec.level >= level:
                uf.union(key[0], key[1])
        comps: dict[int, list[int]] = {}
        for v in range(n):
            comps.setdefault(uf.find(v), []).append(v)
        claimed: dict[int, int] = {}
        for members in comps.values():
            cap = n >> level
            if len(members) > cap:
                errors.append(
                    f"partition: level-{level} component of {len(members)} vertices "
                    f"exceeds cap {cap}"
                )
            node = _pure_cluster_at(forest.leaves[members[0]], level)
            if len(members) == 1:
                if node.kind != K_LEAF:
                    errors.append(
                        f"partition: lone vertex {members[0]} maps to "
                        f"{KIND_NAMES[node.kind]} {node.id} at level {level}"
                    )
                continue
            if node.kind != K_CNODE or node.level != level:
                errors.append(
                    f"partition: component of vertex {members[0]} at level {level} maps to "
                    f"{KIND_NAMES[node.kind]} {node.id} (level {getattr(node, 'level', None)})"
                )
                continue
            for v in members[1:]:
                other = _pure_cluster_at(forest.leaves[v], level)
                if other is not node:
                    errors.append(
                        f"partition: vertices {members[0]} and {v} disagree at level {level}"
                    )
                    break
            prior = claimed.get(node.id)
            if prior is not None:
                errors.append(
                    f"partition: node {node.id} claimed by two level-{level} components"
                )
            claimed[node.id] = members[0]


def _check_sizes(nodes: list[Node], forest, errors: list[str]) -> None:
    for node in nodes:
        if node.kind == K_LEAF:
            if node.size != 1:
                errors.append(f"size-sum: leaf {node.id} has size {node.size}")
            continue
        if node.kind != K_CNODE:
            continue
        total = sum(kid.size for kid in forest.c_children(node))
        if node.size != total:
            errors.append(
                f"size-sum: node {node.id} stores {node.size}, children sum to {total}"
            )


def _check_leaf_levels(forest, errors: list[str]) -> None:
    for leaf in forest.leaves:
        mask = 0
        for level, group in (leaf.adj or {}).items():
            if group:
                mask |= 1 << level
        cp = forest.c_parent(leaf)
        if cp is None:
            if mask:
                errors.append(f"leaf-levels: root leaf {leaf.vertex} still has edges")
        elif mask >> (cp.level + 1):
            errors.append(
                f"leaf-levels: vertex {leaf.vertex} has edges above level {cp.level}"
            )


class ValidationReport:
    """Validator outcome: failures by family plus a counters snapshot."""

    __slots__ = ("failures", "counters")

    def __init__(self, failures: list[str], counters: dict[str, int]) -> None:
        self.failures = failures
        self.counters = counters

    @property
    def ok(self) -> bool:
        return not self.failures

    def families(self) -> set[str]:
        return {line.split(":", 1)[0] for line in self.failures}


def validate_report(engine) -> ValidationReport:
    return ValidationReport(validate_engine(engine), engine.counters.snapshot())
