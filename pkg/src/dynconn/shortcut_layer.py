"""Black-node coloring, bitmap shortcuts, and the deferred repair queue.

The improved local trees keep a sparse "black" subset of nodes that carries
all navigation state: each black node stores its nearest black strict
ancestor (``bip``), the inverse child map (``bic``), and the level bitmap of
its subtree (``ebits``). Level-targeted ancestor walks then hop from black
node to black node instead of climbing one parent at a time.

Structural edits never patch this state inline. They record what moved in a
:class:`Tracker`, and :meth:`ShortcutLayer.flush` repairs coloring, links,
bitmaps, and the induced shortcut tables in one pass over the touched region.
"""

from __future__ import annotations

from .cluster_forest import leaf_edge_mask
from .config import Params, lazy_depth_limit
from .counters import Counters
from .errors import InvariantViolation, NoSuchAncestor
from .nodes import (
    B_DEPTH,
    B_LEAF,
    B_LEVEL,
    B_RANKGAP,
    K_BOT,
    K_BUF,
    K_CNODE,
    K_LEAF,
    K_RANK,
    K_RPATH,
    K_TOP,
    TAG_BOTTOM,
    TAG_BUFFER,
    Node,
)

# Context value for nodes whose jump can never skip a cluster node (light-tree
# interiors and pairing nodes; see _ctx).
CTX_SAFE = 1 << 60

_BBST_KINDS = (K_BUF, K_BOT, K_TOP)


def set_bip(x: Node, b: Node | None, tracker: "Tracker | None" = None) -> None:
    """Point x at its black parent b, maintaining the inverse map.

    Both the old and the new parent get queued for a bitmap refresh when a
    tracker is given; callers doing whole-region rebuilds pass None and
    recompute bitmaps themselves.
    """
    old = x.bip
    if old is b:
        return
    if old is not None and old.bic is not None:
        old.bic.pop(x.id, None)
        if tracker is not None:
            tracker.ebits_up[old.id] = old
    x.bip = b
    if b is not None:
        if b.bic is None:
            b.bic = {}
        b.bic[x.id] = x
        if tracker is not None:
            tracker.ebits_up[b.id] = b


def first_black_above(x: Node) -> Node | None:
    """Nearest black strict ancestor by parent walk."""
    p = x.parent
    while p is not None:
        if p.black:
            return p
        p = p.parent
    return None


def black_frontier(x: Node) -> list[Node]:
    """First black node on every downward corridor out of x.

    x itself is not included; descent stops at the first black node in each
    branch.
    """
    out: list[Node] = []
    stack = list(x.children())
    while stack:
        c = stack.pop()
        if c.black:
            out.append(c)
        else:
            stack.extend(c.children())
    return out


def special_above(x: Node) -> Node | None:
    """Nearest special strict ancestor, found along the black parent chain."""
    a = x.bip if x.black else first_black_above(x)
    while a is not None and not a.special:
        a = a.bip
    return a


class Tracker:
    """Accumulates structural-edit notes between flushes.

    All maps are keyed by node id and iterate in insertion order, which keeps
    repair work deterministic for a given operation sequence.
    """

    __slots__ = (
        "regions",
        "points",
        "gone",
        "orphans",
        "placed",
        "ebits_up",
        "dirty",
    )

    def __init__(self) -> None:
        self.regions: dict[int, Node] = {}
        self.points: dict[int, Node] = {}
        self.gone: dict[int, Node] = {}
        self.orphans: dict[int, Node] = {}
        self.placed: dict[int, Node] = {}
        self.ebits_up: dict[int, Node] = {}
        self.dirty: dict[int, Node] = {}

    def is_empty(self) -> bool:
        return not (
            self.regions
            or self.points
            or self.gone
            or self.orphans
            or self.placed
            or self.ebits_up
            or self.dirty
        )

    def clear(self) -> None:
        self.regions.clear()
        self.points.clear()
        self.gone.clear()
        self.orphans.clear()
        self.placed.clear()
        self.ebits_up.clear()
        self.dirty.clear()

    def note_region(self, r: Node | None) -> None:
        """r's whole subtree was rebuilt; recolor and relink it wholesale."""
        if r is not None:
            self.regions[r.id] = r

    def note_point(self, x: Node) -> None:
        """x itself needs recoloring (its position or context changed)."""
        self.points[x.id] = x

    def note_gone(self, g: Node) -> None:
        """g was unlinked and will never be reused."""
        self.gone[g.id] = g

    def note_moved(self, x: Node) -> None:
        """Call just before detaching x from its current position.

        Captures the anchors that lose x's subtree so their bitmaps and
        shortcut tables get refreshed, and unhooks x's black frontier from
        the old corridor.
        """
        anchor = x.bip if x.black else first_black_above(x)
        if anchor is not None:
            self.ebits_up[anchor.id] = anchor
            sp = anchor if anchor.special else special_above(anchor)
            if sp is not None:
                self.dirty[sp.id] = sp
        if x.black:
            set_bip(x, None, self)
            self.orphans[x.id] = x
        else:
            for f in black_frontier(x):
                set_bip(f, None, self)
                self.orphans[f.id] = f

    def note_placed(self, x: Node) -> None:
        """Call after re-attaching a previously detached subtree root x."""
        self.placed[x.id] = x
        self.points[x.id] = x


class ShortcutLayer:
    """Owns coloring and bitmap repair for one improved structure."""

    __slots__ = ("forest", "params", "counters", "tracker", "induced")

    def __init__(self, forest, params: Params, counters: Counters, tracker: Tracker) -> None:
        self.forest = forest
        self.params = params
        self.counters = counters
        self.tracker = tracker
        self.induced = None  # injected after construction

    # ---------------------------------------------------------- coloring

    def classify_color(self, x: Node) -> tuple[bool, int]:
        """Recompute x's blackness and rule bits from its surroundings."""
        s = self.params.s
        btypes = 0
        kind = x.kind
        if kind == K_CNODE and x.level % s == 0:
            btypes |= B_LEVEL
        if x.is_ranked():
            anc = self._ranked_above(x)
            if anc is not None:
                rv = x.ranked_value()
                pv = anc.ranked_value()
                # a spacing multiple inside [rv, pv) makes the gap black
                first_mult = ((rv + s - 1) // s) * s
                if first_mult < pv:
                    btypes |= B_RANKGAP
        if self._is_embedded_leaf(x):
            btypes |= B_LEAF
        if self._on_spaced_depth(x, s):
            btypes |= B_DEPTH
        return (btypes != 0, btypes)

    @staticmethod
    def _ranked_above(x: Node) -> Node | None:
        p = x.parent
        while p is not None:
            if p.is_ranked():
                return p
            p = p.parent
        return None

    @staticmethod
    def _is_top_member(x: Node) -> bool:
        p = x.parent
        if p is None:
            return False
        if p.kind == K_TOP:
            return True
        # a lone top member hangs directly off the cluster node's right slot
        return p.kind == K_CNODE and p.right is x and x.kind != K_TOP

    def _is_embedded_leaf(self, x: Node) -> bool:
        if x.kind == K_LEAF:
            return True
        tag = x.slot_tag
        if tag == TAG_BUFFER or tag == TAG_BOTTOM:
            return True
        return self._is_top_member(x)

    def _on_spaced_depth(self, x: Node, s: int) -> bool:
        kind = x.kind
        p = x.parent
        if kind in _BBST_KINDS:
            # interior: depth 0 at its tree's root, else the stored depth
            d = x.tdepth if (p is not None and p.kind == kind) else 0
            return d % s == 0
        tag = x.slot_tag
        if tag == TAG_BUFFER:
            d = x.tdepth if (p is not None and p.kind == K_BUF) else 0
            if d % s == 0:
                return True
        elif tag == TAG_BOTTOM:
            d = x.tdepth if (p is not None and p.kind == K_BOT) else 0
            if d % s == 0:
                return True
        if self._is_top_member(x):
            d = x.tdepth if p.kind == K_TOP else 0
            return d % s == 0
        return False

    # ------------------------------------------------------------- walks

    @staticmethod
    def _ctx(x: Node) -> int:
        """Smallest cluster level a jump landing on x could have skipped past.

        Heavy-structure nodes resolve through their owner; a top-tree root
        resolves through the cluster node it hangs from. Everything else is
        interior to a light tree, where a jump can never cross a cluster
        node (every light member is black, so corridors stay inside the
        tree), hence CTX_SAFE.
        """
        if x.kind == K_CNODE:
            return x.level
        ow = x.owner
        if ow is not None:
            return ow.level
        p = x.parent
        if p is not None and p.kind == K_CNODE and p.right is x:
            return p.level
        return CTX_SAFE

    def ascend_to_level(self, v: Node, j: int) -> Node | None:
        """Cluster node at level j containing v, or None if v's component
        has no cluster that deep (counts touched nodes like the plain walk)."""
        counters = self.counters
        touched = 1
        limit = 4 * lazy_depth_limit(self.params) + 64
        x = v
        result: Node | None = None
        if x.kind == K_CNODE:
            if x.level == j:
                result = x
            elif x.level < j:
                counters.nodes_touched += 1
                counters.note_anc_walk(1)
                return None
        if result is None:
            # climb to the first black node, checking clusters on the way
            while not x.black:
                x = x.parent
                if x is None:
                    counters.nodes_touched += touched
                    counters.note_anc_walk(touched)
                    return None
                touched += 1
                if x.kind == K_CNODE:
                    if x.level == j:
                        result = x
                        break
                    if x.level < j:
                        counters.nodes_touched += touched
                        counters.note_anc_walk(touched)
                        return None
        if result is None:
            # jump along black parents while the landing provably cannot
            # have skipped the target level
            while True:
                nb = x.bip
                if nb is None or self._ctx(nb) < j:
                    break
                x = nb
                touched += 1
                if touched > limit:
                    raise InvariantViolation("ancestor walk exceeded its bound")
                if x.kind == K_CNODE and x.level == j:
                    result = x
                    break
        if result is None:
            # short tail: parent-walk the rest
            while True:
                x = x.parent
                if x is None:
                    break
                touched += 1
                if touched > limit:
                    raise InvariantViolation("ancestor walk exceeded its bound")
                if x.kind == K_CNODE:
                    if x.level == j:
                        result = x
                        break
                    if x.level < j:
                        break
        counters.nodes_touched += touched
        counters.note_anc_walk(touched)
        return result

    def vertex_cluster_at(self, leaf: Node, j: int) -> Node:
        """Level-j cluster containing the vertex leaf; the leaf itself acts
        as its own cluster below the first materialized ancestor."""
        self.counters.anc_calls += 1
        got = self.ascend_to_level(leaf, j)
        return leaf if got is None else got

    def ancestor_at_level(self, node: Node, j: int) -> Node:
        if node.kind == K_LEAF:
            return self.vertex_cluster_at(node, j)
        if node.level == j:
            return node
        if node.level < j:
            raise NoSuchAncestor(f"node at level {node.level} has no level-{j} ancestor")
        self.counters.anc_calls += 1
        got = self.ascend_to_level(node, j)
        if got is None:
            raise NoSuchAncestor(f"no level-{j} ancestor found")
        return got

    # ------------------------------------------------------------ bitmaps

    @staticmethod
    def ebits_of(x: Node) -> int:
        # announced bits only; raw adjacency may be ahead of the
        # arrival/departure bookkeeping mid-promotion
        if x.kind == K_LEAF:
            return x.ebits
        m = 0
        if x.bic:
            for c in x.bic.values():
                m |= c.ebits
        return m

    def recolor_node(self, x: Node) -> tuple[bool, bool]:
        """Recompute color and special flags in place.

        Returns (black_changed, special_changed). Shortcut-table surgery for
        flag changes is the flush's job.
        """
        self.counters.recolor_nodes += 1
        black, btypes = self.classify_color(x)
        was_black = x.black
        x.black = black
        x.btypes = btypes
        if black:
            sp, stypes = self.induced.classify_special(x)
        else:
            sp, stypes = False, 0
        was_sp = x.special
        x.special = sp
        x.stypes = stypes
        return (black != was_black, sp != was_sp)

    # -------------------------------------------------------------- flush

    def rebuild_shortcuts_around(self, x: Node) -> None:
        """Recolor, relink, and refresh bitmaps for x's subtree now."""
        self.tracker.note_region(x)
        self.flush()

    @staticmethod
    def _region_stop(x: Node, root: Node) -> bool:
        """True where a region walk must not descend past x.

        Cluster children, vertex leaves, bottom roots, and the roots of
        buffer/top trees bound a region: reshapes above them never change
        their interior structure.
        """
        if x is root:
            return False
        kind = x.kind
        if kind == K_CNODE or kind == K_LEAF or x.bot_root:
            return True
        if kind == K_RANK and x.owner is None:
            return True  # light pairing root; its interior is untouched from here
        p = x.parent
        if kind == K_BUF and (p is None or p.kind != K_BUF):
            return True
        if kind == K_TOP and (p is None or p.kind != K_TOP):
            return True
        return False

    def flush(self) -> None:
        """Repair coloring, black links, bitmaps, and shortcut tables."""
        t = self.tracker
        if t.is_empty():
            return
        induced = self.induced

        # ---- phase 0: scrub departed nodes
        if t.gone:
            for g in t.gone.values():
                if g.black:
                    set_bip(g, None, t)
                    if g.bic:
                        for c in list(g.bic.values()):
                            if c.id not in t.gone:
                                c.bip = None
                                t.orphans[c.id] = c
                if g.special:
                    self._drop_node_entries(g)
                g.black = False
                g.btypes = 0
                g.special = False
                g.stypes = 0
                g.ebits = 0
                g.bip = None
                g.bic = None
                g.ind_desc = None
                g.ind_asc = None
            for gid in t.gone:
                t.regions.pop(gid, None)
                t.points.pop(gid, None)
                t.orphans.pop(gid, None)
                t.placed.pop(gid, None)
                t.ebits_up.pop(gid, None)
                t.dirty.pop(gid, None)

        # ---- phase 1: recolor regions and points
        visited: set[int] = set()
        region_lists: list[tuple[Node, list[Node]]] = []
        flips_black: list[Node] = []
        flips_white: list[Node] = []
        gained_sp: list[Node] = []
        lost_sp: list[Node] = []

        def recolor(x: Node) -> None:
            bchg, schg = self.recolor_node(x)
            if bchg:
                (flips_black if x.black else flips_white).append(x)
            if schg:
                if x.special:
                    gained_sp.append(x)
                else:
                    lost_sp.append(x)

        for r in t.regions.values():
            order: list[Node] = []
            stack = [r]
            while stack:
                x = stack.pop()
                if x.id in visited:
                    if x is not r:
                        continue
                    # r was already recolored as an earlier walk's stop
                    # boundary, but that walk did not descend past it; this
                    # region's interior still needs the pass
                    order.append(x)
                else:
                    visited.add(x.id)
                    order.append(x)
                    recolor(x)
                    if x.special:
                        t.dirty[x.id] = x
                if not self._region_stop(x, r):
                    stack.extend(x.children())
            region_lists.append((r, order))
        for p in t.points.values():
            if p.id not in visited:
                visited.add(p.id)
                recolor(p)
                if p.special:
                    t.dirty[p.id] = p

        # entries held by demoted specials are dead; partners need recomputes
        for x in lost_sp:
            self._drop_node_entries(x)

        # ---- phase 2: relink black parent pointers
        for r, order in region_lists:
            anchor = first_black_above(r)
            stack2: list[tuple[Node, Node | None]] = [(r, anchor)]
            while stack2:
                x, pb = stack2.pop()
                stopped = self._region_stop(x, r)
                if x.black:
                    set_bip(x, pb, t)
                    below = x
                else:
                    below = pb
                if stopped:
                    if not x.black:
                        # white boundary (a cluster child): its interior
                        # frontier must hook to the corridor above
                        for f in black_frontier(x):
                            if f.bip is not below:
                                set_bip(f, below, t)
                    continue
                for c in x.children():
                    stack2.append((c, below))

        def rehook(x: Node) -> None:
            a = first_black_above(x)
            if x.black:
                set_bip(x, a, t)
                for f in black_frontier(x):
                    if f.bip is not x:
                        set_bip(f, x, t)
            else:
                for f in black_frontier(x):
                    if f.bip is not a:
                        set_bip(f, a, t)

        for x in flips_white:
            if x.id in t.gone:
                continue
            a = first_black_above(x)
            if x.bic:
                for c in list(x.bic.values()):
                    set_bip(c, a, t)
            set_bip(x, None, t)
            x.bic = None
            x.ebits = 0
        for x in flips_black:
            if x.id not in t.gone:
                rehook(x)
        for x in t.orphans.values():
            if x.black and x.bip is None and x.id not in t.gone:
                a = first_black_above(x)
                set_bip(x, a, t)
        for x in t.placed.values():
            if x.id in t.gone:
                continue
            if x.black:
                if x.bip is None:
                    set_bip(x, first_black_above(x), t)
            else:
                rehook(x)

        # ---- phase 3: bitmaps, bottom-up inside regions then upward
        def refresh(x: Node) -> None:
            new = self.ebits_of(x)
            if new != x.ebits:
                x.ebits = new
                self.counters.bitmap_recomputes += 1
                if x.special:
                    t.dirty[x.id] = x
                    above = special_above(x)
                    if above is not None:
                        t.dirty[above.id] = above

        for r, order in region_lists:
            for x in reversed(order):
                if x.black and not self._region_stop(x, r):
                    refresh(x)
            a = first_black_above(r)
            if a is not None:
                t.ebits_up[a.id] = a
            if r.black:
                t.ebits_up[r.id] = r
        for x in list(t.points.values()):
            if x.black and x.id not in visited:
                refresh(x)
        for x in flips_black:
            refresh(x)
            if x.bip is not None:
                t.ebits_up[x.bip.id] = x.bip
        for start in list(t.ebits_up.values()):
            x: Node | None = start
            while x is not None and x.black:
                new = self.ebits_of(x)
                if new == x.ebits:
                    break
                x.ebits = new
                self.counters.bitmap_recomputes += 1
                if x.special:
                    t.dirty[x.id] = x
                    above = special_above(x)
                    if above is not None:
                        t.dirty[above.id] = above
                x = x.bip

        # ---- phase 4/5: assemble the dirty shortcut set
        for r, _ in region_lists:
            sp = r if r.special else special_above(r)
            if sp is not None:
                t.dirty[sp.id] = sp
        for x in gained_sp:
            t.dirty[x.id] = x
            above = special_above(x)
            if above is not None:
                t.dirty[above.id] = above
        for x in lost_sp:
            above = special_above(x)
            if above is not None:
                t.dirty[above.id] = above
        for x in t.placed.values():
            # the ancestor special gained a frontier member even if no bitmap
            # changed, so its uniqueness counts need a fresh pass
            if x.special:
                t.dirty[x.id] = x
            above = special_above(x)
            if above is not None:
                t.dirty[above.id] = above

        # ---- phase 6: recompute descending shortcut tables
        work = [x for x in t.dirty.values() if x.id not in t.gone]
        t.clear()
        for x in work:
            if x.special:
                induced.recompute_descending(x)

    def _drop_node_entries(self, x: Node) -> None:
        """Remove every shortcut entry touching x; partners above go dirty."""
        induced = self.induced
        t = self.tracker
        if x.ind_desc:
            for i in list(x.ind_desc):
                induced.drop_entry(x, i)
        if x.ind_asc:
            for i in list(x.ind_asc):
                up = x.ind_asc[i]
                induced.drop_entry(up, i)
                if up.id not in t.gone:
                    t.dirty[up.id] = up
        x.ind_desc = None
        x.ind_asc = None
