"""Connectivity engine: updates, queries, and the replacement search.

Deleting an edge at level i may disconnect the two halves of its level-i
cluster. Two searches then grow outward from the endpoints' level-(i+1)
clusters in strict alternation, one edge exploration per turn. Either
they meet (the edge was not a bridge at this level; the smaller
explored side is promoted to pay for the work) or one side exhausts its
component first (that side, or the other if it is too big, is promoted
and split off as a new level-i cluster, and the hunt continues one
level down). Promotions are collected during the search and applied
afterwards so the traversal never races its own restructuring.
"""

from __future__ import annotations

from .cluster_forest import Forest, SimpleStructure
from .config import EngineConfig, Params, derive_params
from .counters import Counters
from .errors import LevelMismatch
from .graph_store import EdgeKey, GraphStore
from .nodes import K_CNODE, K_LEAF, Node

_OK = 0
_EXHAUSTED = 1
_COLLIDED = 2


class _Side:
    """One of the two interleaved search frontiers."""

    __slots__ = (
        "structure",
        "level",
        "marks",
        "vertex",
        "start",
        "owned",
        "volume",
        "edges",
        "seen",
        "stack",
        "units",
        "hit_node",
        "hit_key",
    )

    def __init__(
        self,
        structure,
        level: int,
        marks: dict[int, "_Side"],
        start: Node,
        vertex: int,
    ) -> None:
        self.structure = structure
        self.level = level
        self.marks = marks
        self.vertex = vertex
        self.start = start
        self.owned: dict[int, Node] = {start.id: start}
        self.volume = start.size
        self.edges: list[EdgeKey] = []
        self.seen: set[EdgeKey] = set()
        self.stack = [structure.iter_level_edges(start, level)]
        self.units = 0
        self.hit_node: Node | None = None
        self.hit_key: EdgeKey | None = None
        marks[start.id] = self

    def step(self, leaves: list[Node]) -> int:
        """Explore one edge; returns _OK, _EXHAUSTED, or _COLLIDED."""
        while self.stack:
            nxt = next(self.stack[-1], None)
            if nxt is None:
                self.stack.pop()
                continue
            key, leaf = nxt
            if key in self.seen:
                continue  # second endpoint of an edge this side already walked
            self.units += 1
            self.seen.add(key)
            self.edges.append(key)
            other = key[0] if key[1] == leaf.vertex else key[1]
            target = self.structure.vertex_cluster_at(leaves[other], self.level + 1)
            owner = self.marks.get(target.id)
            if owner is None:
                self.marks[target.id] = self
                self.owned[target.id] = target
                self.volume += target.size
                self.stack.append(self.structure.iter_level_edges(target, self.level))
            elif owner is not self:
                self.hit_node = target
                self.hit_key = key
                return _COLLIDED
            return _OK
        return _EXHAUSTED


class ConnectivityEngine:
    """Fully dynamic connectivity over a fixed vertex set."""

    __slots__ = ("n", "variant", "config", "params", "counters", "store", "forest", "structure")

    def __init__(self, n: int, variant: str = "improved", config: EngineConfig | None = None) -> None:
        if variant not in ("simple", "improved"):
            raise ValueError(f"unknown variant: {variant!r}")
        if config is None:
            config = EngineConfig()
        self.n = n
        self.variant = variant
        self.config = config
        self.params = derive_params(n, config)
        self.counters = Counters()
        self.store = GraphStore(n, self.params.lmax, self.counters)
        self.forest = Forest(self.params, self.counters)
        if variant == "simple":
            self.structure = SimpleStructure(self.forest, self.store, self.params, self.counters)
        else:
            from .lazy_local_tree import LazyStructure

            self.structure = LazyStructure(self.forest, self.store, self.params, self.counters)

    # -- queries --------------------------------------------------------------

    def connected(self, u: int, v: int) -> bool:
        self.store.check_vertex(u)
        self.store.check_vertex(v)
        if u == v:
            return True
        leaves = self.forest.leaves
        ru = self.structure.vertex_cluster_at(leaves[u], 0)
        rv = self.structure.vertex_cluster_at(leaves[v], 0)
        return ru is rv

    # -- updates --------------------------------------------------------------

    def insert(self, u: int, v: int) -> None:
        self.store.insert_edge(u, v)
        leaves = self.forest.leaves
        lu, lv = leaves[u], leaves[v]
        if len(self.store.groups[u].get(0, ())) == 1:
            self.structure.on_level_arrival(lu, 0)
        if len(self.store.groups[v].get(0, ())) == 1:
            self.structure.on_level_arrival(lv, 0)
        ru = self.structure.vertex_cluster_at(lu, 0)
        rv = self.structure.vertex_cluster_at(lv, 0)
        if ru is not rv:
            self._merge_clusters(0, ru, rv, None)

    def delete(self, u: int, v: int) -> None:
        rec = self.store.delete_edge(u, v)
        level = rec.level
        leaves = self.forest.leaves
        if not self.store.has_edges_at_level(u, level):
            self.structure.on_level_departure(leaves[u], level)
        if not self.store.has_edges_at_level(v, level):
            self.structure.on_level_departure(leaves[v], level)
        side_a = self.structure.vertex_cluster_at(leaves[u], level + 1)
        side_b = self.structure.vertex_cluster_at(leaves[v], level + 1)
        rep_a, rep_b = u, v
        while True:
            if side_a is side_b:
                return
            outcome = self._replacement_search(level, side_a, rep_a, side_b, rep_b)
            if outcome is None:
                return  # reconnected at this level
            side_a, rep_a, side_b, rep_b = outcome
            if level == 0:
                return
            level -= 1

    # -- cluster surgery --------------------------------------------------------

    def _merge_clusters(self, level: int, a: Node, b: Node, parent: Node | None) -> Node:
        """Union two same-level cluster nodes below a common parent."""
        if a.kind == K_CNODE and b.kind == K_CNODE and a.level != b.level:
            raise LevelMismatch(f"cannot merge levels {a.level} and {b.level}")
        self.counters.cluster_merges += 1
        structure = self.structure
        if a.kind == K_CNODE and b.kind == K_CNODE:
            if parent is not None:
                structure.remove_child(parent, b)
            a.size += b.size
            structure.merge_cnodes(a, b)
            self.forest.free_cnode(b)
            if parent is not None:
                structure.reposition_child(parent, a)
            return a
        if a.kind == K_CNODE or b.kind == K_CNODE:
            host, leaf = (a, b) if a.kind == K_CNODE else (b, a)
            if parent is not None:
                structure.remove_child(parent, leaf)
            host.size += 1
            structure.attach_child(host, leaf, size_grew=True)
            if parent is not None:
                structure.reposition_child(parent, host)
            return host
        # two bare leaves grow a fresh cluster node
        c = self.forest.new_cnode(level)
        c.size = 2
        if parent is not None:
            structure.remove_child(parent, a)
            structure.remove_child(parent, b)
        structure.attach_child(c, a)
        structure.attach_child(c, b)
        if parent is not None:
            structure.attach_child(parent, c)
        else:
            structure.make_root(c)
        return c

    def _apply_promotions(self, keys: list[EdgeKey], level: int) -> None:
        """Raise the listed edges from `level` to `level + 1`, merging clusters."""
        store = self.store
        structure = self.structure
        leaves = self.forest.leaves
        done: set[EdgeKey] = set()
        for key in keys:
            if key in done:
                continue
            done.add(key)
            store.promote_edge(key)
            x, y = key
            for vert in (x, y):
                leaf = leaves[vert]
                if not store.has_edges_at_level(vert, level):
                    structure.on_level_departure(leaf, level)
                if len(store.groups[vert].get(level + 1, ())) == 1:
                    structure.on_level_arrival(leaf, level + 1)
            ca = structure.vertex_cluster_at(leaves[x], level + 1)
            cb = structure.vertex_cluster_at(leaves[y], level + 1)
            if ca is not cb:
                parent = self.forest.c_parent(ca)
                self._merge_clusters(level + 1, ca, cb, parent)

    def _replacement_search(
        self, level: int, side_a: Node, rep_a: int, side_b: Node, rep_b: int
    ) -> tuple[Node, int, Node, int] | None:
        """Hunt for a level-`level` path between two separated cluster nodes.

        Returns None when a replacement path reconnects the halves, else
        the pair (split-off node, its vertex, remaining node, its vertex)
        for the next round one level down.
        """
        counters = self.counters
        counters.searches += 1
        marks: dict[int, _Side] = {}
        leaves = self.forest.leaves
        pa = _Side(self.structure, level, marks, side_a, rep_a)
        pb = _Side(self.structure, level, marks, side_b, rep_b)
        sides = (pa, pb)
        turn = 0
        exhausted: _Side | None = None
        while True:
            act = sides[turn & 1]
            status = act.step(leaves)
            if status == _COLLIDED:
                counters.collisions += 1
                self._settle_collision(act, pa if act is pb else pb, level)
                return None
            if status == _EXHAUSTED:
                exhausted = act
                break
            turn += 1
        other = pa if exhausted is pb else pb
        cap = self.n >> (level + 1)
        chosen = exhausted
        if exhausted.volume > cap:
            status = other.step(leaves)
            while status == _OK:
                status = other.step(leaves)
            assert status == _EXHAUSTED  # disjoint component, no meeting possible
            assert other.volume <= cap
            chosen = other
        counters.search_units += pa.units + pb.units
        self._apply_promotions(chosen.edges, level)
        w = self.structure.vertex_cluster_at(leaves[chosen.vertex], level + 1)
        partner = pa if chosen is pb else pb
        new_node, rem = self._split_off(level, w)
        return new_node, chosen.vertex, rem, partner.vertex

    def _settle_collision(self, last: _Side, first: _Side, level: int) -> None:
        """Both frontiers met: promote the cheaper side's explored edges."""
        self.counters.search_units += last.units + first.units
        n_first = first.volume
        n_last = last.volume
        if n_first <= n_last:
            self._apply_promotions(first.edges, level)
        else:
            keys = [k for k in last.edges if k != last.hit_key]
            self._apply_promotions(keys, level)

    def _split_off(self, level: int, w: Node) -> tuple[Node, Node]:
        """Carve cluster w out of its level-`level` parent into a sibling."""
        structure = self.structure
        forest = self.forest
        p = forest.c_parent(w)
        assert p is not None and p.level == level
        self.counters.splits += 1
        p.size -= w.size
        structure.remove_child(p, w, rescan=True)
        g = forest.c_parent(p)
        if w.kind == K_LEAF:
            new_node = w
        else:
            new_node = forest.new_cnode(level)
            new_node.size = w.size
            structure.attach_child(new_node, w)
        if g is not None:
            structure.attach_child(g, new_node)
        else:
            structure.make_root(new_node)
        if p.size == 1:
            lone = forest.sole_child(p)
            assert lone.kind == K_LEAF
            structure.remove_child(p, lone)
            if g is not None:
                structure.remove_child(g, p)
                structure.attach_child(g, lone)
            else:
                structure.make_root(lone)
            forest.free_cnode(p)
            self.counters.dissolves += 1
            return new_node, lone
        if g is not None:
            structure.reposition_child(g, p)
        return new_node, p

    # -- bookkeeping --------------------------------------------------------------

    def snapshot(self) -> dict[str, int]:
        return self.counters.snapshot()

    def validate(self) -> list[str]:
        from .validation import validate_engine

        return validate_engine(self)
