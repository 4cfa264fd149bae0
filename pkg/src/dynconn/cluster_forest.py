"""Cluster forest: the leveled cluster hierarchy and its flat local trees.

Clusters at level i are the components of the subgraph of edges at level
>= i. A cluster node's children in the conceptual hierarchy are the
level-(i+1) clusters inside it; singleton chains are never materialized,
so a vertex leaf hangs under the deepest cluster that properly contains
it and stands in for its own cluster at every deeper level. The children
of one cluster node are embedded in a binary local tree built from rank
trees (equal-rank pairing) joined by a rank path, which keeps any child
of v at depth about log(n(u)/n(v)) below its parent u.

This module holds the variant-independent forest core plus the eager
("simple") structure with edge bitmaps on every node.
"""

from __future__ import annotations

from .config import Params
from .counters import Counters
from .errors import NotAChild
from .graph_store import GraphStore
from .nodes import (
    K_CNODE,
    K_LEAF,
    K_RANK,
    K_RPATH,
    TAG_ROOT,
    TAG_SIMPLE,
    Node,
)


class Forest:
    """Node factory and variant-independent navigation."""

    __slots__ = ("params", "counters", "leaves", "_next_id")

    def __init__(self, params: Params, counters: Counters) -> None:
        self.params = params
        self.counters = counters
        self.leaves: list[Node] = []
        for v in range(params.n):
            leaf = Node(v, K_LEAF)
            leaf.vertex = v
            leaf.size = 1
            leaf.slot_tag = TAG_ROOT
            self.leaves.append(leaf)
        self._next_id = params.n

    def make_id(self) -> int:
        nid = self._next_id
        self._next_id = nid + 1
        return nid

    def new_cnode(self, level: int) -> Node:
        node = Node(self.make_id(), K_CNODE)
        node.level = level
        node.size = 0
        self.counters.cnodes_created += 1
        return node

    def free_cnode(self, node: Node) -> None:
        node.parent = node.left = node.right = None
        node.slot_ref = node.tree = node.owner = None
        node.bip = node.bic = None
        node.ind_desc = node.ind_asc = None
        self.counters.cnodes_deleted += 1

    def c_parent(self, node: Node) -> Node | None:
        """The nearest strictly enclosing cluster node, if any."""
        cur = node.parent
        while cur is not None and cur.kind != K_CNODE:
            cur = cur.parent
        return cur

    def c_children(self, node: Node) -> list[Node]:
        """Cluster children of a cluster node, in local-tree order."""
        out: list[Node] = []
        stack = [kid for kid in (node.right, node.left) if kid is not None]
        while stack:
            cur = stack.pop()
            if cur.kind == K_CNODE or cur.kind == K_LEAF:
                out.append(cur)
            else:
                if cur.right is not None:
                    stack.append(cur.right)
                if cur.left is not None:
                    stack.append(cur.left)
        return out

    def sole_child(self, node: Node) -> Node:
        kids = self.c_children(node)
        assert len(kids) == 1
        return kids[0]

    def root_of(self, node: Node) -> Node:
        cur = node
        while cur.parent is not None:
            cur = cur.parent
        return cur

    def all_roots(self) -> list[Node]:
        seen: dict[int, Node] = {}
        for leaf in self.leaves:
            root = self.root_of(leaf)
            seen[root.id] = root
        return list(seen.values())


def leaf_edge_mask(leaf: Node) -> int:
    """Bitmap of levels with at least one incident edge, straight from storage."""
    adj = leaf.adj
    if not adj:
        return 0
    mask = 0
    for level, group in adj.items():
        if group:
            mask |= 1 << level
    return mask


class SimpleStructure:
    """Eager variant: bitmaps everywhere, walks instead of shortcuts."""

    __slots__ = ("forest", "store", "params", "counters")

    def __init__(
        self, forest: Forest, store: GraphStore, params: Params, counters: Counters
    ) -> None:
        self.forest = forest
        self.store = store
        self.params = params
        self.counters = counters
        for leaf in forest.leaves:
            leaf.adj = store.groups[leaf.vertex]

    # -- rank-tree plumbing ----------------------------------------------------

    def _strip(self, u: Node) -> list[Node]:
        """Remove the rank path of u's local tree; return the rank-tree roots."""
        a, b = u.left, u.right
        u.left = u.right = None
        roots: list[Node] = []
        if a is None and b is None:
            return roots
        if a is None or b is None:
            lone = a if a is not None else b
            lone.parent = None
            return [lone]
        if a.kind != K_RPATH and b.kind != K_RPATH:
            a.parent = None
            b.parent = None
            return [a, b]
        first, spine = (a, b) if b.kind == K_RPATH else (b, a)
        first.parent = None
        roots.append(first)
        node = spine
        while True:
            x, y = node.left, node.right
            node.left = node.right = node.parent = None
            self.counters.rank_nodes_deleted += 1
            if x.kind == K_RPATH or y.kind == K_RPATH:
                root, nxt = (y, x) if x.kind == K_RPATH else (x, y)
                root.parent = None
                roots.append(root)
                node = nxt
            else:
                x.parent = None
                y.parent = None
                roots.append(x)
                roots.append(y)
                return roots

    def _pair(self, roots: list[Node], owner: Node) -> list[Node]:
        """Exhaustively pair equal-rank trees; result has distinct ranks."""
        if not roots:
            return []
        buckets: dict[int, list[Node]] = {}
        for node in roots:
            buckets.setdefault(node.ranked_value(), []).append(node)
        out: list[Node] = []
        rank = min(buckets)
        top = max(buckets)
        while rank <= top:
            bucket = buckets.get(rank)
            if bucket:
                bucket.sort(key=lambda nd: nd.id)
                while len(bucket) >= 2:
                    a = bucket.pop(0)
                    b = bucket.pop(0)
                    z = Node(self.forest.make_id(), K_RANK)
                    z.rank = rank + 1
                    z.owner = owner
                    z.left, z.right = a, b
                    a.parent = z
                    b.parent = z
                    z.ebits = a.ebits | b.ebits
                    self.counters.rank_nodes_created += 1
                    buckets.setdefault(rank + 1, []).append(z)
                    if rank + 1 > top:
                        top = rank + 1
                if bucket:
                    out.append(bucket[0])
            rank += 1
        out.sort(key=lambda nd: -nd.ranked_value())
        return out

    def _mount(self, u: Node, roots: list[Node]) -> None:
        """Hang rank-tree roots (distinct ranks, descending) under u."""
        k = len(roots)
        if k == 0:
            u.ebits = 0
            return
        if k == 1:
            r1 = roots[0]
            if r1.kind == K_RANK:
                # u itself takes the top pairing position
                x, y = r1.left, r1.right
                r1.left = r1.right = r1.parent = None
                self.counters.rank_nodes_deleted += 1
                u.left, u.right = x, y
                x.parent = u
                y.parent = u
            else:
                u.left = r1
                u.right = None
                r1.parent = u
        else:
            tail = roots[k - 1]
            for idx in range(k - 2, 0, -1):
                v = Node(self.forest.make_id(), K_RPATH)
                v.rank = roots[idx].ranked_value()
                v.owner = u
                v.left, v.right = roots[idx], tail
                roots[idx].parent = v
                tail.parent = v
                v.ebits = v.left.ebits | v.right.ebits
                self.counters.rank_nodes_created += 1
                tail = v
            u.left, u.right = roots[0], tail
            roots[0].parent = u
            tail.parent = u
        left_bits = u.left.ebits if u.left is not None else 0
        right_bits = u.right.ebits if u.right is not None else 0
        u.ebits = left_bits | right_bits

    def _refresh_up(self, node: Node) -> None:
        cur = node.parent
        while cur is not None:
            bits = 0
            if cur.left is not None:
                bits |= cur.left.ebits
            if cur.right is not None:
                bits |= cur.right.ebits
            if bits == cur.ebits:
                break
            cur.ebits = bits
            self.counters.bitmap_recomputes += 1
            cur = cur.parent

    # -- structure operations ---------------------------------------------------

    def attach_child(self, p: Node, c: Node, size_grew: bool = False) -> None:
        c.slot_tag = TAG_SIMPLE
        c.slot_ref = p
        roots = self._strip(p)
        roots.append(c)
        self._mount(p, self._pair(roots, p))
        self._refresh_up(p)

    def remove_child(self, p: Node, c: Node, rescan: bool = False) -> None:
        if self.forest.c_parent(c) is not p:
            raise NotAChild(f"node {c.id} is not a child of {p.id}")
        roots = self._strip(p)
        chain: list[Node] = []
        node = c
        while node.parent is not None:
            chain.append(node.parent)
            node = node.parent
        orphans: list[Node] = []
        child = c
        for par in chain:
            sib = par.left if par.right is child else par.right
            orphans.append(sib)
            child = par
        for par in chain:
            par.left = par.right = par.parent = None
            self.counters.rank_nodes_deleted += 1
        for sib in orphans:
            sib.parent = None
        roots = [r for r in roots if r is not node]
        roots.extend(orphans)
        c.parent = None
        c.slot_tag = TAG_ROOT
        c.slot_ref = None
        self._mount(p, self._pair(roots, p))
        self._refresh_up(p)

    def merge_cnodes(self, a: Node, b: Node) -> Node:
        """Absorb b's children into a's local tree. Caller frees b."""
        roots = self._strip(a)
        roots.extend(self._strip(b))
        self._mount(a, self._pair(roots, a))
        for kid in self.forest.c_children(a):
            kid.slot_ref = a
        self._refresh_up(a)
        return a

    def reposition_child(self, p: Node, c: Node) -> None:
        self.remove_child(p, c)
        self.attach_child(p, c)

    def make_root(self, c: Node) -> None:
        c.parent = None
        c.slot_tag = TAG_ROOT
        c.slot_ref = None

    # -- bitmaps ------------------------------------------------------------------

    def on_level_arrival(self, leaf: Node, level: int) -> None:
        self.counters.arrivals += 1
        bit = 1 << level
        node = leaf
        while node is not None and not (node.ebits & bit):
            node.ebits |= bit
            node = node.parent

    def on_level_departure(self, leaf: Node, level: int) -> None:
        self.counters.departures += 1
        leaf.ebits = leaf_edge_mask(leaf)
        cur = leaf.parent
        while cur is not None:
            bits = 0
            if cur.left is not None:
                bits |= cur.left.ebits
            if cur.right is not None:
                bits |= cur.right.ebits
            if bits == cur.ebits:
                break
            cur.ebits = bits
            cur = cur.parent

    # -- navigation -----------------------------------------------------------------

    def vertex_cluster_at(self, leaf: Node, level: int) -> Node:
        """The node standing for the level-`level` cluster around this vertex."""
        touched = 1
        cur = leaf.parent
        best = None
        while cur is not None:
            touched += 1
            if cur.kind == K_CNODE:
                best = cur
                if cur.level == level:
                    self.counters.nodes_touched += touched
                    self.counters.note_anc_walk(touched)
                    return cur
                if cur.level < level:
                    break
            cur = cur.parent
        self.counters.nodes_touched += touched
        self.counters.note_anc_walk(touched)
        if best is None or best.level < level:
            return leaf  # the vertex stands for its own cluster here
        return best

    def ancestor_at_level(self, node: Node, level: int) -> Node:
        if node.kind == K_LEAF:
            return self.vertex_cluster_at(node, level)
        from .errors import NoSuchAncestor

        cur = node
        touched = 0
        while cur is not None:
            touched += 1
            if cur.kind == K_CNODE and cur.level == level:
                self.counters.nodes_touched += touched
                self.counters.note_anc_walk(touched)
                return cur
            cur = cur.parent
        self.counters.nodes_touched += touched
        raise NoSuchAncestor(f"no ancestor of node {node.id} at level {level}")

    # -- validation ----------------------------------------------------------------

    def validate_extra(self, nodes: list[Node], errors: list[str]) -> None:
        for node in nodes:
            if node.kind == K_LEAF:
                want = leaf_edge_mask(node)
            else:
                want = 0
                if node.left is not None:
                    want |= node.left.ebits
                if node.right is not None:
                    want |= node.right.ebits
            if node.ebits != want:
                errors.append(
                    f"bitmaps: node {node.id} holds {node.ebits:#x}, recomputed {want:#x}"
                )
        for node in nodes:
            if node.kind == K_CNODE:
                self._check_local_shape(node, errors)

    def _check_local_shape(self, u: Node, errors: list[str]) -> None:
        for kid in self.forest.c_children(u):
            if kid.slot_ref is not u or kid.slot_tag != TAG_SIMPLE:
                errors.append(f"rank-shape: child {kid.id} of {u.id} carries a stale slot")
        a, b = u.left, u.right
        kids = [k for k in (a, b) if k is not None]
        if not kids:
            errors.append(f"rank-shape: cluster {u.id} has no children")
            return
        if len(kids) == 1:
            if kids[0].kind == K_RPATH:
                errors.append(f"rank-shape: lone rank-path child under {u.id}")
            self._check_rank_tree(kids[0], errors)
            return
        if a.kind == K_RPATH:
            errors.append(f"rank-shape: rank path on the left under {u.id}")
            return
        self._check_rank_tree(a, errors)
        prev = a.ranked_value()
        if b.kind != K_RPATH:
            # two rank-tree roots: descending, or the top pair after an unpack
            if b.ranked_value() > prev:
                errors.append(f"rank-shape: roots out of order under {u.id}")
            self._check_rank_tree(b, errors)
            return
        node = b
        while True:
            x, y = node.left, node.right
            if x is None or y is None:
                errors.append(f"rank-shape: rank-path node {node.id} missing a child")
                return
            if x.kind == K_RPATH:
                errors.append(f"rank-shape: rank path on the left under {node.id}")
                return
            if node.rank != x.ranked_value():
                errors.append(
                    f"rank-shape: rank-path node {node.id} stores {node.rank}, "
                    f"left root has {x.ranked_value()}"
                )
            if x.ranked_value() >= prev:
                errors.append(f"rank-shape: ranks not descending at node {node.id}")
            prev = x.ranked_value()
            self._check_rank_tree(x, errors)
            if y.kind != K_RPATH:
                if y.ranked_value() >= prev:
                    errors.append(f"rank-shape: tail root out of order under {node.id}")
                self._check_rank_tree(y, errors)
                return
            node = y

    def _check_rank_tree(self, root: Node, errors: list[str]) -> None:
        stack = [root]
        while stack:
            cur = stack.pop()
            if cur.kind != K_RANK:
                continue
            x, y = cur.left, cur.right
            if x is None or y is None:
                errors.append(f"rank-shape: pairing node {cur.id} missing a child")
                continue
            for kid in (x, y):
                if kid.kind == K_RPATH:
                    errors.append(f"rank-shape: rank path inside a rank tree at {cur.id}")
                elif kid.ranked_value() != cur.rank - 1:
                    errors.append(
                        f"rank-shape: pairing node {cur.id} rank {cur.rank} over child "
                        f"rank {kid.ranked_value()}"
                    )
                stack.append(kid)

    # -- level-edge iteration ----------------------------------------------------------

    def iter_level_edges(self, node: Node, level: int):
        """Yield (edge key, leaf) for level-`level` edges under this cluster node."""
        bit = 1 << level
        counters = self.counters
        stack = [node]
        while stack:
            cur = stack.pop()
            if not (cur.ebits & bit):
                continue
            if cur.kind == K_LEAF:
                group = cur.adj.get(level)
                if group:
                    for key in group:
                        counters.iterator_yields += 1
                        yield key, cur
                continue
            if cur.right is not None:
                stack.append(cur.right)
            if cur.left is not None:
                stack.append(cur.left)
