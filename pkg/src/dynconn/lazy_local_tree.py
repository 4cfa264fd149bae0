"""Local trees with deferred maintenance: heavy rank assemblies plus light zones.

Each cluster node splits its children by weight.  A child whose subtree
holds at least a 1/2^h fraction of the parent's vertices is heavy and lives
in a rank-paired assembly hanging off the parent's left slot, exactly like
the plain local tree but without unpacking single carries.  Everything else
is light and lives under the right slot in a three-tier zone:

  buffer    a small weight-balanced tree of recent arrivals, keyed by size
  bottoms   frozen buffers, converted wholesale once the buffer overflows;
            their keys are never updated, members only ever leave
  top       a weight-balanced tree over ranked items: bottom roots, rank
            pairing trees joining equal-ranked bottoms, and one sentinel
            slot for the live buffer

The point of the split is that bulk structural churn lands in the buffer
(cheap, re-keyed freely) while bottoms stay immutable, so their positions,
colors and shortcut anchors survive unrelated updates.  All color and
shortcut repair is routed through the shortcut layer's tracker and settled
in one flush per public mutation.
"""

from __future__ import annotations

from .cluster_forest import Forest, leaf_edge_mask
from .config import Params, child_depth_limit, lazy_depth_limit, shortcut_path_limit
from .counters import Counters
from .errors import NotAChild
from .graph_store import GraphStore
from .induced_shortcut_layer import InducedShortcuts, canonical_entries, collect_entries
from .leaftree import LeafTree
from .nodes import (
    K_BOT,
    K_BUF,
    K_CNODE,
    K_LEAF,
    K_RANK,
    K_RPATH,
    K_TOP,
    TAG_BOTTOM,
    TAG_BUFFER,
    TAG_HEAVY,
    TAG_ROOT,
    Node,
    crank,
)
from .shortcut_layer import ShortcutLayer, Tracker


def is_heavy(params: Params, child_size: int, parent_size: int) -> bool:
    """A child is heavy when it carries at least parent_size / 2^h vertices."""
    return child_size >= max(1, parent_size >> params.h)


def _buffer_key(m: Node) -> tuple[int, int]:
    return (m.size, m.id)


class BufferTree:
    """Event sink and handle for one buffer (or, after conversion, bottom) tree."""

    __slots__ = ("lt", "tracker", "light")

    def __init__(self, tracker: Tracker, light: "LightTree | None" = None) -> None:
        self.lt: LeafTree | None = None
        self.tracker = tracker
        self.light = light

    def touched(self, x: Node) -> None:
        self.tracker.note_point(x)

    def made(self, x: Node) -> None:
        self.tracker.note_point(x)

    def gone(self, x: Node) -> None:
        self.tracker.note_gone(x)

    def _fix_top_root(self, old: Node, new: Node) -> None:
        # This tree hangs inside the owner's top tree.  A root identity swap
        # rewires the outer slot mechanically, but when that slot IS the top
        # tree's root, the top tree's own root reference must follow.
        light = self.light
        if light is not None and light.top.root is old:
            light.top.root = new

    def root_swap(self, old: Node, new: Node, lt: LeafTree) -> None:
        self._fix_top_root(old, new)
        self.tracker.note_point(new)

    def reshaped(self, x: Node, lt: LeafTree) -> None:
        self.tracker.note_region(x)


class BottomTree(BufferTree):
    """Frozen buffer.  The root carries the max member crank as its rank."""

    __slots__ = ("created", "structure")

    def __init__(self, structure: "LazyStructure", light: "LightTree",
                 created: int) -> None:
        super().__init__(structure.tracker, light)
        self.structure = structure
        self.created = created

    def root_swap(self, old: Node, new: Node, lt: LeafTree) -> None:
        self._fix_top_root(old, new)
        # The rank rides on whatever node is currently the bottom root.
        new.bot_root = True
        new.rank = old.rank
        old.bot_root = False
        if new.kind == K_CNODE or new.kind == K_LEAF:
            # A member became the (lone) bottom root: its ranked value jumped
            # from its own crank to the frozen bottom rank, so everything
            # anchored on it needs new rank-gap bits.
            self.structure._note_rank_context(new)
        else:
            self.tracker.note_point(new)


class LightTree:
    """Buffer + top pair for one cluster node's light children."""

    __slots__ = ("owner", "tracker", "bufw", "top")

    def __init__(self, owner: Node, structure: "LazyStructure") -> None:
        self.owner = owner
        self.tracker = structure.tracker
        # claims=False everywhere: members keep their own tree slot, which for
        # cluster nodes holds their own light zone; membership is recorded in
        # slot_tag / slot_ref instead.
        self.bufw = BufferTree(self.tracker, self)
        lt = LeafTree(K_BUF, _buffer_key, structure.counters, self.bufw,
                      structure.forest.make_id, claims=False)
        lt.tree_ref = self.bufw
        self.bufw.lt = lt
        self.top = LeafTree(K_TOP, self._top_key, structure.counters, self,
                            structure.forest.make_id, claims=False)
        self.top.tree_ref = self

    def _top_key(self, m: Node) -> tuple[int]:
        # The live buffer's root sits leftmost, below every real rank.
        if self.bufw.lt is not None and self.bufw.lt.root is m:
            return (-1,)
        return (m.ranked_value(),)

    def count(self) -> int:
        return self.bufw.lt.count + self.top.count

    # top-tree events
    def touched(self, x: Node) -> None:
        self.tracker.note_point(x)

    def made(self, x: Node) -> None:
        self.tracker.note_point(x)

    def gone(self, x: Node) -> None:
        self.tracker.note_gone(x)

    def root_swap(self, old: Node, new: Node, lt: LeafTree) -> None:
        self.tracker.note_point(new)

    def reshaped(self, x: Node, lt: LeafTree) -> None:
        self.tracker.note_region(x)


class LazyStructure:
    """Cluster forest maintenance with deferred, tracker-driven repair."""

    def __init__(self, forest: Forest, store: GraphStore, params: Params,
                 counters: Counters) -> None:
        self.forest = forest
        self.store = store
        self.params = params
        self.counters = counters
        self.tracker = Tracker()
        self.layer = ShortcutLayer(forest, params, counters, self.tracker)
        self.induced = InducedShortcuts(params, counters)
        self.layer.induced = self.induced
        for leaf in forest.leaves:
            leaf.adj = store.groups[leaf.vertex]
            self.layer.recolor_node(leaf)

    # ------------------------------------------------------------------
    # size / rank bookkeeping

    def _thresh(self, p: Node) -> int:
        return max(1, p.size >> self.params.h)

    def _note_rank_context(self, p: Node) -> None:
        """p's ranked value changed: recolor p and everything anchored on it."""
        t = self.tracker
        t.note_point(p)
        if p.kind == K_CNODE:
            light = p.tree
            if light is not None:
                for m in light.bufw.lt.iter_leaves():
                    t.note_point(m)
                for m in light.top.iter_leaves():
                    t.note_point(m)
            if p.left is not None:
                t.note_region(p.left)
        elif p.kind == K_BOT:
            # bottom root rank changed: members anchor their rank gaps on it
            for m in p.tree.lt.iter_leaves():
                t.note_point(m)

    def _crank_sync(self, p: Node | None) -> None:
        """Settle a stale size rank before operating around p.

        The engine adjusts cluster sizes before calling us, so p may sit in
        its parent's zone under an outdated key or pairing rank.  Re-place
        it first; placement refreshes the cached rank.
        """
        if p is None or p.kind != K_CNODE:
            return
        r = p.size.bit_length() - 1
        if p.rank == r:
            return
        g = self.forest.c_parent(p)
        if g is not None and p.slot_tag != TAG_ROOT:
            self.reposition_child(g, p)
            return
        p.rank = r
        self._note_rank_context(p)

    def _sync_cache(self, c: Node) -> None:
        """Refresh c's rank cache after it has been (re)placed."""
        if c.kind != K_CNODE or c.bot_root:
            return
        r = c.size.bit_length() - 1
        if c.rank != r:
            c.rank = r
            self._note_rank_context(c)

    # ------------------------------------------------------------------
    # heavy assemblies

    def _heavy_leaves(self, p: Node) -> list[Node]:
        out: list[Node] = []
        head = p.left
        if head is None:
            return out
        stack = [head]
        while stack:
            x = stack.pop()
            if x.kind == K_CNODE or x.kind == K_LEAF:
                out.append(x)
            else:
                if x.right is not None:
                    stack.append(x.right)
                if x.left is not None:
                    stack.append(x.left)
        return out

    def _dismantle_heavy(self, p: Node) -> list[Node]:
        """Tear the assembly down to its cluster children, in left-right order."""
        head = p.left
        if head is None:
            return []
        p.left = None
        head.parent = None
        leaves: list[Node] = []
        interiors: list[Node] = []
        stack = [head]
        while stack:
            x = stack.pop()
            if x.kind == K_CNODE or x.kind == K_LEAF:
                leaves.append(x)
                x.parent = None
            else:
                interiors.append(x)
                if x.right is not None:
                    stack.append(x.right)
                if x.left is not None:
                    stack.append(x.left)
        for z in interiors:
            z.left = None
            z.right = None
            z.parent = None
            z.owner = None
            self.tracker.note_gone(z)
            self.counters.rank_nodes_deleted += 1
        return leaves

    def _join(self, a: Node, b: Node, rank: int, owner: Node | None) -> Node:
        z = Node(self.forest.make_id(), K_RANK)
        z.rank = rank
        z.owner = owner
        z.left = a
        z.right = b
        a.parent = z
        b.parent = z
        z.ebits = a.ebits | b.ebits
        self.counters.rank_nodes_created += 1
        return z

    def _pair_heavy(self, p: Node, items: list[Node]) -> list[Node]:
        """Binary-carry pairing of equal ranks; returns roots, rank descending."""
        work: dict[int, list[Node]] = {}
        for t in items:
            work.setdefault(t.ranked_value(), []).append(t)
        for lst in work.values():
            lst.sort(key=lambda x: x.id)
        out: list[Node] = []
        r = min(work)
        while True:
            lst = work.get(r, [])
            while len(lst) >= 2:
                a = lst.pop(0)
                b = lst.pop(0)
                z = self._join(a, b, r + 1, p)
                work.setdefault(r + 1, []).append(z)
            if lst:
                out.append(lst[0])
            work.pop(r, None)
            if not work:
                break
            r = min(work)
        out.reverse()
        return out

    def _mount_assembly(self, p: Node, leaves: list[Node]) -> None:
        for c in leaves:
            c.slot_tag = TAG_HEAVY
            c.slot_ref = p
        if not leaves:
            self.tracker.note_point(p)
            return
        roots = self._pair_heavy(p, leaves)
        if len(roots) == 1:
            head = roots[0]
        else:
            tail = roots[-1]
            for i in range(len(roots) - 2, -1, -1):
                v = Node(self.forest.make_id(), K_RPATH)
                v.owner = p
                v.rank = roots[i].ranked_value()
                v.left = roots[i]
                v.right = tail
                roots[i].parent = v
                tail.parent = v
                v.ebits = v.left.ebits | v.right.ebits
                self.counters.rank_nodes_created += 1
                tail = v
            head = tail
        p.left = head
        head.parent = p
        self.tracker.note_region(head)
        self.tracker.note_point(p)

    def _heavy_add(self, p: Node, c: Node) -> None:
        leaves = self._dismantle_heavy(p)
        leaves.append(c)
        self._mount_assembly(p, leaves)

    def _heavy_remove(self, p: Node, c: Node) -> None:
        self.tracker.note_moved(c)
        leaves = self._dismantle_heavy(p)
        leaves = [x for x in leaves if x is not c]
        self._mount_assembly(p, leaves)

    def _demote_scan(self, p: Node) -> None:
        """p grew: heavy children may have fallen under the new threshold."""
        thresh = self._thresh(p)
        heavies = self._heavy_leaves(p)
        demote = [c for c in heavies if c.size < thresh]
        if not demote:
            return
        for c in demote:
            self.tracker.note_moved(c)
        leaves = self._dismantle_heavy(p)
        keep = [c for c in leaves if c.size >= thresh]
        self._mount_assembly(p, keep)
        for c in demote:
            self._light_insert(p, c)

    # ------------------------------------------------------------------
    # light zone

    def _top_sync(self, p: Node, light: LightTree) -> None:
        r = light.top.root
        p.right = r
        if r is not None:
            r.parent = p

    def _light_insert(self, p: Node, c: Node) -> None:
        light = p.tree
        if light is None:
            light = LightTree(p, self)
            p.tree = light
        c.slot_tag = TAG_BUFFER
        c.slot_ref = light.bufw
        lt = light.bufw.lt
        was_empty = lt.count == 0
        lt.insert(c)
        self.counters.buffer_moves += 1
        self.tracker.note_placed(c)
        if was_empty:
            # the lone member doubles as the top tree's buffer sentinel
            light.top.insert(c)
            self._top_sync(p, light)
        if lt.count > self.params.buffer_cap:
            self._convert_buffer(p, light)
        self._top_sync(p, light)

    def _convert_buffer(self, p: Node, light: LightTree) -> None:
        lt = light.bufw.lt
        root = lt.root
        self.tracker.note_moved(root)
        light.top.remove(root)
        self._top_sync(p, light)
        botw = BottomTree(self, light, lt.count)
        lt.convert(K_BOT, botw)
        lt.events = botw
        botw.lt = lt
        for m in lt.iter_leaves():
            m.slot_tag = TAG_BOTTOM
            m.slot_ref = botw
        root.bot_root = True
        root.rank = crank(lt.max_leaf())
        fresh = BufferTree(self.tracker, light)
        flt = LeafTree(K_BUF, _buffer_key, self.counters, fresh,
                       self.forest.make_id, claims=False)
        flt.tree_ref = fresh
        fresh.lt = flt
        light.bufw = fresh
        self.counters.bottom_conversions += 1
        self.tracker.note_region(root)
        self._top_insert_ranked(p, light, root)
        self.tracker.note_placed(root)

    def _top_insert_ranked(self, p: Node, light: LightTree, t: Node) -> None:
        """Insert a ranked item into the top tree, carrying over equal ranks."""
        node = t
        while True:
            m = light.top.find((node.ranked_value(),))
            if m is None:
                break
            self.tracker.note_moved(m)
            light.top.remove(m)
            z = self._join(*((m, node) if m.id < node.id else (node, m)),
                           rank=node.ranked_value() + 1, owner=None)
            self.tracker.note_point(z)
            self.tracker.note_placed(m)
            self.tracker.note_placed(node)
            node = z
        light.top.insert(node)
        self.tracker.note_placed(node)
        self._top_sync(p, light)

    def _rank_item_detach(self, p: Node, light: LightTree, x: Node) -> None:
        """Pull a ranked item out of the top zone, unwinding its pairing tree."""
        top = light.top
        path: list[Node] = []
        node = x
        while True:
            par = node.parent
            if par is not None and par.kind == K_RANK and par.owner is None:
                path.append(par)
                node = par
            else:
                break
        if not path:
            self.tracker.note_moved(x)
            top.remove(x)
            self._top_sync(p, light)
            return
        released: list[Node] = []
        child = x
        for z in path:
            released.append(z.left if z.right is child else z.right)
            child = z
        self.tracker.note_moved(x)
        for s in released:
            self.tracker.note_moved(s)
        pairing_root = path[-1]
        top.remove(pairing_root)
        self._top_sync(p, light)
        for z in path:
            z.left = None
            z.right = None
            z.parent = None
            self.tracker.note_gone(z)
            self.counters.rank_nodes_deleted += 1
        x.parent = None
        for s in released:
            s.parent = None
        for s in released:
            self._top_insert_ranked(p, light, s)

    def _buffer_evict(self, p: Node, light: LightTree, c: Node) -> None:
        lt = light.bufw.lt
        self.counters.buffer_moves += 1
        self.tracker.note_moved(c)
        if lt.count == 1:
            light.top.remove(c)
            lt.remove(c)
            self._top_sync(p, light)
        else:
            lt.remove(c)
        self._top_sync(p, light)

    def _bottom_evict(self, p: Node, light: LightTree, c: Node) -> None:
        botw: BottomTree = c.slot_ref
        lt = botw.lt
        self.counters.bottom_leaf_removals += 1
        if lt.count == 1:
            # c is itself the bottom root; dissolve the bottom entirely
            self._rank_item_detach(p, light, c)
            lt.remove(c)
            c.bot_root = False
            if c.kind == K_CNODE:
                c.rank = c.size.bit_length() - 1
            self._note_rank_context(c)
            return
        self.tracker.note_moved(c)
        lt.remove(c)
        # the departed member may have been carrying the max crank, and a
        # cluster member may have changed size since the freeze, so always
        # re-derive the root rank from what is left
        root2 = lt.root
        nr = crank(lt.max_leaf())
        if nr != root2.rank:
            self.counters.bottom_root_repairs += 1
            if root2.kind == K_CNODE or root2.kind == K_LEAF:
                # lone member took over as root; its own crank rules
                root2.rank = nr
                self._repair_reposition(p, light, root2)
            else:
                self._rank_item_detach(p, light, root2)
                root2.rank = nr
                self._top_insert_ranked(p, light, root2)
                self._note_rank_context(root2)

    @staticmethod
    def _botw_of(x: Node) -> BottomTree:
        """The wrapper of the bottom rooted at x (interior or lone member)."""
        return x.tree if x.kind == K_BOT else x.slot_ref

    def _repoint_bottoms(self, item: Node, light: LightTree) -> None:
        """A ranked item changed light zones: its bottom wrappers must follow."""
        stack = [item]
        while stack:
            x = stack.pop()
            if x.bot_root:
                self._botw_of(x).light = light
            elif x.kind == K_RANK:
                if x.right is not None:
                    stack.append(x.right)
                if x.left is not None:
                    stack.append(x.left)

    def _repair_reposition(self, p: Node, light: LightTree, root: Node) -> None:
        """Re-key a bottom root in the top tree after its rank changed."""
        self._rank_item_detach(p, light, root)
        self._top_insert_ranked(p, light, root)
        self._note_rank_context(root)

    def repair_bottom_root_rank(self, p: Node, root: Node) -> bool:
        """Restore root.rank to the max member crank; True if a repair ran."""
        botw = self._botw_of(root)
        nr = crank(botw.lt.max_leaf())
        if root.rank == nr:
            return False
        light = p.tree
        self.counters.bottom_root_repairs += 1
        self._rank_item_detach(p, light, root)
        root.rank = nr
        self._top_insert_ranked(p, light, root)
        self._note_rank_context(root)
        self.layer.flush()
        return True

    def _place_child(self, p: Node, c: Node) -> None:
        if is_heavy(self.params, c.size, p.size):
            self._heavy_add(p, c)
        else:
            self._light_insert(p, c)

    def _rescan_light(self, p: Node) -> None:
        """p shrank: light children may now clear the heavy threshold."""
        light = p.tree
        if light is None:
            return
        thresh = self._thresh(p)
        promote: list[Node] = []
        if light.bufw.lt.count:
            promote.extend(light.bufw.lt.collect_ge((thresh, -1)))
        if light.top.count:
            rmin = thresh.bit_length() - 1
            for t in light.top.collect_ge((rmin,)):
                stack = [t]
                while stack:
                    x = stack.pop()
                    if x.bot_root:
                        if x.rank >= rmin:
                            promote.extend(
                                self._botw_of(x).lt.collect_ge((thresh, -1)))
                    elif x.kind == K_RANK and x.owner is None:
                        if x.right is not None:
                            stack.append(x.right)
                        if x.left is not None:
                            stack.append(x.left)
                    elif x.kind == K_CNODE or x.kind == K_LEAF:
                        if x.size >= thresh:
                            promote.append(x)
        promote = [c for c in promote if c.size >= thresh]
        if not promote:
            return
        for c in promote:
            if c.slot_tag == TAG_BUFFER:
                self._buffer_evict(p, light, c)
            else:
                self._bottom_evict(p, light, c)
        leaves = self._dismantle_heavy(p)
        leaves.extend(promote)
        self._mount_assembly(p, leaves)

    # ------------------------------------------------------------------
    # public structure operations

    def attach_child(self, p: Node, c: Node, size_grew: bool = False) -> None:
        self._crank_sync(p)
        if size_grew:
            self._demote_scan(p)
        self._sync_cache(c)
        self._place_child(p, c)
        self.layer.flush()

    def remove_child(self, p: Node, c: Node, rescan: bool = False) -> None:
        self._crank_sync(p)
        if self.forest.c_parent(c) is not p:
            raise NotAChild(f"node {c.id} is not a cluster child of {p.id}")
        tag = c.slot_tag
        if tag == TAG_HEAVY:
            self._heavy_remove(p, c)
        elif tag == TAG_BUFFER:
            self._buffer_evict(p, p.tree, c)
        elif tag == TAG_BOTTOM:
            self._bottom_evict(p, p.tree, c)
        else:
            raise NotAChild(f"node {c.id} has no placement under {p.id}")
        c.parent = None
        c.slot_tag = TAG_ROOT
        c.slot_ref = None
        self.tracker.note_point(c)
        if rescan:
            self._rescan_light(p)
        self.layer.flush()

    def reposition_child(self, p: Node, c: Node) -> None:
        self._crank_sync(p)
        tag = c.slot_tag
        heavy_now = is_heavy(self.params, c.size, p.size)
        if tag == TAG_HEAVY and heavy_now:
            # stays heavy: one rebuild re-ranks it
            self.tracker.note_moved(c)
            leaves = self._dismantle_heavy(p)
            self._mount_assembly(p, leaves)
        else:
            if tag == TAG_HEAVY:
                self._heavy_remove(p, c)
            elif tag == TAG_BUFFER:
                self._buffer_evict(p, p.tree, c)
            elif tag == TAG_BOTTOM:
                self._bottom_evict(p, p.tree, c)
            else:
                raise NotAChild(f"node {c.id} has no placement under {p.id}")
            self._place_child(p, c)
        self._sync_cache(c)
        self.layer.flush()

    def merge_cnodes(self, a: Node, b: Node) -> Node:
        self._crank_sync(a)
        thresh = self._thresh(a)
        ha = self._heavy_leaves(a)
        hb = self._heavy_leaves(b)
        for c in hb:
            self.tracker.note_moved(c)
        for c in ha:
            if c.size < thresh:
                self.tracker.note_moved(c)
        la = a.tree
        lb = b.tree
        ca = la.count() if la is not None else 0
        cb = lb.count() if lb is not None else 0
        if cb > ca:
            # adopt b's larger light zone wholesale; fold a's into it
            a.tree = lb
            lb.owner = a
            source = la
            b.right = None
            self._top_sync(a, lb)
            # members now anchor their rank gaps on a's crank instead of b's
            for m in lb.bufw.lt.iter_leaves():
                self.tracker.note_point(m)
            for m in lb.top.iter_leaves():
                self.tracker.note_point(m)
        else:
            source = lb
        b.tree = None
        leaves_a = self._dismantle_heavy(a)
        leaves_b = self._dismantle_heavy(b)
        merged = leaves_a + leaves_b
        keep = [c for c in merged if c.size >= thresh]
        demote = [c for c in merged if c.size < thresh]
        self._mount_assembly(a, keep)
        for c in demote:
            self._light_insert(a, c)
        if source is not None and (source.bufw.lt.count or source.top.count):
            tops = list(source.top.iter_leaves())
            for m in tops:
                self.tracker.note_moved(m)
            buf_members = list(source.bufw.lt.iter_leaves())
            for m in buf_members:
                self.tracker.note_moved(m)
            sroot = source.bufw.lt.root
            source.top.destroy_all()
            light = a.tree
            if light is None:
                light = LightTree(a, self)
                a.tree = light
            for m in tops:
                if m is sroot:
                    continue
                self._repoint_bottoms(m, light)
                self._top_insert_ranked(a, light, m)
            if buf_members:
                source.bufw.lt.destroy_all()
                for m in buf_members:
                    self._light_insert(a, m)
        b.right = None
        self.tracker.note_gone(b)
        self.layer.flush()
        return a

    def make_root(self, c: Node) -> None:
        self._sync_cache(c)
        c.parent = None
        c.slot_tag = TAG_ROOT
        c.slot_ref = None
        self.tracker.note_point(c)
        self.layer.flush()

    # ------------------------------------------------------------------
    # level bit maintenance and queries

    def on_level_arrival(self, leaf: Node, level: int) -> None:
        self.counters.arrivals += 1
        self.induced.on_level_arrival(leaf, level)

    def on_level_departure(self, leaf: Node, level: int) -> None:
        self.counters.departures += 1
        self.induced.on_level_departure(leaf, level)

    def vertex_cluster_at(self, leaf: Node, j: int) -> Node:
        return self.layer.vertex_cluster_at(leaf, j)

    def ancestor_at_level(self, node: Node, j: int) -> Node:
        return self.layer.ancestor_at_level(node, j)

    def iter_level_edges(self, node: Node, level: int):
        bit = 1 << level
        stack = [node]
        while stack:
            x = stack.pop()
            if not x.black:
                for c in reversed(x.children()):
                    stack.append(c)
                continue
            if not (x.ebits & bit):
                continue
            if x.kind == K_LEAF:
                group = x.adj.get(level)
                if group:
                    for key in group:
                        self.counters.iterator_yields += 1
                        yield (key, x)
                continue
            if x.special and x.ind_desc is not None and level in x.ind_desc:
                stack.append(x.ind_desc[level])
                continue
            if x.bic:
                carriers = [c for c in x.bic.values() if c.ebits & bit]
                for c in reversed(carriers):
                    stack.append(c)

    # ------------------------------------------------------------------
    # validation

    def validate_extra(self, nodes: list[Node], errors: list[str]) -> None:
        for u in nodes:
            if u.kind == K_CNODE:
                self._validate_assembly(u, errors)
                self._validate_light(u, errors)
        self._validate_depth(errors)
        self._validate_rank_paths(errors)
        self._validate_colors(nodes, errors)
        self._validate_links(nodes, errors)
        self._validate_bitmaps(nodes, errors)
        self._validate_induced(nodes, errors)

    def _validate_assembly(self, u: Node, errors: list[str]) -> None:
        thresh = self._thresh(u)
        head = u.left
        if head is None:
            return
        if head.parent is not u:
            errors.append(f"lazy-shape: assembly head {head.id} not parented to {u.id}")
        spine_ranks: list[int] = []
        stack = [(head, True)]
        while stack:
            x, on_spine = stack.pop()
            if x.kind == K_CNODE or x.kind == K_LEAF:
                if x.slot_tag != TAG_HEAVY or x.slot_ref is not u:
                    errors.append(f"lazy-shape: heavy child {x.id} mis-slotted under {u.id}")
                if x.size < thresh:
                    errors.append(
                        f"lazy-shape: child {x.id} size {x.size} below heavy "
                        f"threshold {thresh} of {u.id}")
                continue
            if x.kind == K_RPATH:
                if not on_spine:
                    errors.append(f"lazy-shape: path node {x.id} off the spine under {u.id}")
                if x.owner is not u:
                    errors.append(f"lazy-shape: path node {x.id} owner is not {u.id}")
                if x.left is None or x.right is None:
                    errors.append(f"lazy-shape: path node {x.id} missing a child")
                    continue
                if x.left.ranked_value() != x.rank:
                    errors.append(f"lazy-shape: path node {x.id} rank mismatch with left tree")
                spine_ranks.append(x.rank)
                stack.append((x.right, True))
                stack.append((x.left, False))
            elif x.kind == K_RANK:
                if x.owner is not u:
                    errors.append(f"lazy-shape: rank node {x.id} owner is not {u.id}")
                if x.left is None or x.right is None:
                    errors.append(f"lazy-shape: rank node {x.id} missing a child")
                    continue
                for c in (x.left, x.right):
                    if c.ranked_value() != x.rank - 1:
                        errors.append(
                            f"lazy-shape: rank node {x.id} child {c.id} rank "
                            f"{c.ranked_value()} != {x.rank - 1}")
                stack.append((x.right, False))
                stack.append((x.left, False))
            else:
                errors.append(f"lazy-shape: foreign node {x.id} kind {x.kind} in assembly of {u.id}")
        if head.kind == K_RPATH:
            tail_rank = None
            v = head
            while v.kind == K_RPATH:
                v = v.right
            tail_rank = v.ranked_value()
            seq = spine_ranks + [tail_rank]
            for i in range(len(seq) - 1):
                if seq[i] <= seq[i + 1]:
                    errors.append(
                        f"lazy-shape: spine ranks not strictly descending under {u.id}: {seq}")
                    break

    def _validate_light(self, u: Node, errors: list[str]) -> None:
        light = u.tree
        if light is None:
            if u.right is not None:
                errors.append(f"lazy-shape: {u.id} has right slot but no light zone")
            return
        if light.owner is not u:
            errors.append(f"lazy-shape: light zone of {u.id} owned by {light.owner.id}")
        thresh = self._thresh(u)
        top = light.top
        buf = light.bufw.lt
        if top.count == 0 and buf.count == 0:
            if u.right is not None:
                errors.append(f"lazy-shape: {u.id} right slot set but light zone empty")
            return
        if u.right is not top.root:
            errors.append(f"lazy-shape: {u.id} right slot is not its top root")
        elif top.root is not None and top.root.parent is not u:
            errors.append(f"lazy-shape: top root of {u.id} not parented back")
        if buf.count > self.params.buffer_cap:
            errors.append(f"lazy-shape: buffer of {u.id} over capacity ({buf.count})")
        if buf.count:
            sentinel = top.find((-1,))
            if sentinel is not buf.root:
                errors.append(f"lazy-shape: buffer of {u.id} missing its top sentinel")
        else:
            if top.find((-1,)) is not None:
                errors.append(f"lazy-shape: stale buffer sentinel under {u.id}")
        prev_key = None
        for m in buf.iter_leaves():
            if m.slot_tag != TAG_BUFFER or m.slot_ref is not light.bufw:
                errors.append(f"lazy-shape: buffer member {m.id} mis-slotted under {u.id}")
            if m.size >= thresh:
                errors.append(f"lazy-shape: buffer member {m.id} is heavy-sized under {u.id}")
            key = _buffer_key(m)
            if prev_key is not None and key <= prev_key:
                errors.append(f"lazy-shape: buffer of {u.id} keys out of order at {m.id}")
            prev_key = key
            if buf.find(key) is not m:
                errors.append(f"lazy-shape: buffer member {m.id} unreachable by its key")
        self._validate_tdepths(buf, f"buffer of {u.id}", errors)
        self._validate_tdepths(top, f"top of {u.id}", errors)
        seen_ranks: set[int] = set()
        for m in top.iter_leaves():
            if buf.root is m:
                continue
            rv = m.ranked_value()
            if rv in seen_ranks:
                errors.append(f"lazy-shape: duplicate top rank {rv} under {u.id}")
            seen_ranks.add(rv)
            if top.find((rv,)) is not m:
                errors.append(f"lazy-shape: top member {m.id} unreachable by rank {rv}")
            self._validate_rank_item(u, light, m, thresh, errors)

    def _validate_rank_item(self, u: Node, light: LightTree, item: Node,
                            thresh: int, errors: list[str]) -> None:
        stack = [item]
        while stack:
            x = stack.pop()
            if x.kind == K_RANK:
                if x.owner is not None:
                    errors.append(f"lazy-shape: light pairing node {x.id} has an owner")
                if x.left is None or x.right is None:
                    errors.append(f"lazy-shape: pairing node {x.id} missing a child")
                    continue
                for c in (x.left, x.right):
                    if c.ranked_value() != x.rank - 1:
                        errors.append(
                            f"lazy-shape: pairing node {x.id} child rank "
                            f"{c.ranked_value()} != {x.rank - 1}")
                stack.append(x.right)
                stack.append(x.left)
            elif x.bot_root:
                self._validate_bottom(u, light, x, thresh, errors)
            else:
                errors.append(
                    f"lazy-shape: top item {x.id} kind {x.kind} is neither a "
                    f"pairing node nor a bottom root under {u.id}")

    def _validate_bottom(self, u: Node, light: LightTree, root: Node,
                         thresh: int, errors: list[str]) -> None:
        botw = self._botw_of(root)
        if not isinstance(botw, BottomTree):
            errors.append(f"lazy-shape: bottom root {root.id} lacks its wrapper")
            return
        if botw.light is not light:
            errors.append(f"lazy-shape: bottom {root.id} points at a foreign light zone")
        lt = botw.lt
        if lt.root is not root:
            errors.append(f"lazy-shape: bottom root flag on non-root {root.id}")
        if lt.count < 1:
            errors.append(f"lazy-shape: empty bottom under {u.id}")
            return
        if lt.count > botw.created or botw.created > 2 * self.params.buffer_cap:
            errors.append(
                f"lazy-shape: bottom of {u.id} count {lt.count} created "
                f"{botw.created} out of bounds")
        mx = 0
        for m in lt.iter_leaves():
            if m.slot_tag != TAG_BOTTOM or m.slot_ref is not botw:
                errors.append(f"lazy-shape: bottom member {m.id} mis-slotted under {u.id}")
            if m.size >= thresh:
                errors.append(f"lazy-shape: bottom member {m.id} is heavy-sized under {u.id}")
            if lt.find(_buffer_key(m)) is not m:
                errors.append(f"lazy-shape: bottom member {m.id} unreachable by its key")
            mx = max(mx, crank(m))
        if root.rank != mx:
            errors.append(
                f"lazy-shape: bottom root {root.id} rank {root.rank} != max "
                f"member crank {mx}")
        self._validate_tdepths(lt, f"bottom {root.id} of {u.id}", errors)

    def _validate_tdepths(self, lt: LeafTree, what: str, errors: list[str]) -> None:
        if lt.root is None:
            return
        stack = [(lt.root, 0)]
        while stack:
            x, d = stack.pop()
            if x is not lt.root and x.tdepth != d:
                errors.append(f"lazy-shape: {what}: node {x.id} depth {x.tdepth} != {d}")
            if x.kind == lt.kind and x.tree is lt.tree_ref:
                if x.left is not None:
                    stack.append((x.left, d + 1))
                if x.right is not None:
                    stack.append((x.right, d + 1))

    def _validate_depth(self, errors: list[str]) -> None:
        limit = lazy_depth_limit(self.params)
        for leaf in self.forest.leaves:
            d = 0
            x = leaf
            while x.parent is not None:
                x = x.parent
                d += 1
                if d > limit + 1:
                    break
            if d > limit:
                errors.append(f"lazy-depth: leaf {leaf.id} at depth {d} > {limit}")
        for u in self.forest.all_roots():
            stack = [u]
            while stack:
                x = stack.pop()
                if x.kind == K_CNODE:
                    for c in self.forest.c_children(x):
                        hops = 0
                        w = c
                        while w is not x:
                            w = w.parent
                            hops += 1
                        lim = child_depth_limit(self.params, x.size, c.size)
                        if hops > lim:
                            errors.append(
                                f"lazy-depth: child {c.id} is {hops} hops under "
                                f"{x.id}, limit {lim}")
                        stack.append(c)

    def _validate_rank_paths(self, errors: list[str]) -> None:
        # Between consecutive cluster nodes, ranked values never decrease
        # and at most two adjacent pairs are equal.
        for u in self.forest.all_roots():
            stack = [u]
            while stack:
                x = stack.pop()
                if x.kind != K_CNODE:
                    continue
                for c in self.forest.c_children(x):
                    stack.append(c)
                    prev = c.ranked_value()
                    equal_pairs = 0
                    w = c.parent
                    while w is not None and w is not x:
                        if w.is_ranked():
                            rv = w.ranked_value()
                            if rv < prev:
                                errors.append(
                                    f"rank-path: rank drops from {prev} to {rv} "
                                    f"at {w.id} between {c.id} and {x.id}")
                                break
                            if rv == prev:
                                equal_pairs += 1
                            prev = rv
                        w = w.parent
                    else:
                        rv = x.ranked_value()
                        if rv < prev:
                            errors.append(
                                f"rank-path: parent {x.id} rank {rv} below path "
                                f"rank {prev} from {c.id}")
                        elif rv == prev:
                            equal_pairs += 1
                    if equal_pairs > 2:
                        errors.append(
                            f"rank-path: {equal_pairs} equal-rank pairs between "
                            f"{c.id} and {x.id}")

    def _validate_colors(self, nodes: list[Node], errors: list[str]) -> None:
        for x in nodes:
            black, btypes = self.layer.classify_color(x)
            if (x.black, x.btypes) != (black, btypes):
                errors.append(
                    f"colors: node {x.id} stored ({x.black}, {x.btypes:#x}) != "
                    f"recomputed ({black}, {btypes:#x})")
                continue
            if black:
                special, stypes = self.induced.classify_special(x)
            else:
                special, stypes = False, 0
            if (x.special, x.stypes) != (special, stypes):
                errors.append(
                    f"colors: node {x.id} special stored ({x.special}, "
                    f"{x.stypes:#x}) != recomputed ({special}, {stypes:#x})")
            if x.special and not x.black:
                errors.append(f"colors: node {x.id} special but not black")

    def _validate_links(self, nodes: list[Node], errors: list[str]) -> None:
        k_bic = self.params.k_bic
        for x in nodes:
            if not x.black:
                if x.bip is not None:
                    errors.append(f"bip: white node {x.id} has an upward link")
                if x.bic:
                    errors.append(f"bip: white node {x.id} has child links")
                continue
            expect = None
            w = x.parent
            while w is not None:
                if w.black:
                    expect = w
                    break
                w = w.parent
            if x.bip is not expect:
                have = x.bip.id if x.bip is not None else None
                want = expect.id if expect is not None else None
                errors.append(f"bip: node {x.id} links to {have}, expected {want}")
                continue
            if expect is not None:
                if expect.bic is None or expect.bic.get(x.id) is not x:
                    errors.append(f"bip: node {x.id} missing from {expect.id} child links")
            if x.bic:
                if len(x.bic) > k_bic:
                    errors.append(f"bip: node {x.id} has {len(x.bic)} child links > {k_bic}")
                for cid, c in x.bic.items():
                    if c.id != cid or c.bip is not x:
                        errors.append(f"bip: stale child link {cid} under {x.id}")

    def _validate_bitmaps(self, nodes: list[Node], errors: list[str]) -> None:
        masks: dict[int, int] = {}

        def subtree_mask(x: Node) -> int:
            got = masks.get(x.id)
            if got is not None:
                return got
            order = [x]
            idx = 0
            while idx < len(order):
                cur = order[idx]
                idx += 1
                for c in cur.children():
                    if c.id not in masks:
                        order.append(c)
            for cur in reversed(order):
                if cur.kind == K_LEAF:
                    masks[cur.id] = leaf_edge_mask(cur)
                else:
                    m = 0
                    for c in cur.children():
                        m |= masks[c.id]
                    masks[cur.id] = m
            return masks[x.id]

        for x in nodes:
            if not x.black:
                continue
            want = subtree_mask(x)
            if x.ebits != want:
                errors.append(
                    f"bitmaps: node {x.id} carries {x.ebits:#x}, subtree has {want:#x}")

    def _validate_induced(self, nodes: list[Node], errors: list[str]) -> None:
        want = canonical_entries(self.forest.all_roots())
        have = collect_entries(nodes)
        if want != have:
            extra = {k: v for k, v in have.items() if want.get(k) != v}
            missing = {k: v for k, v in want.items() if have.get(k) != v}
            errors.append(
                f"induced: stored tables disagree with recomputation; "
                f"extra={sorted(extra)[:4]} missing={sorted(missing)[:4]}")
        limit = shortcut_path_limit(self.params)
        for x in nodes:
            if x.ind_desc:
                if not x.special:
                    errors.append(f"induced: non-special node {x.id} holds entries")
                for lvl, c in x.ind_desc.items():
                    if c.ind_asc is None or c.ind_asc.get(lvl) is not x:
                        errors.append(
                            f"induced: entry {x.id}@{lvl} lacks its mirror at {c.id}")
                    if not c.special:
                        errors.append(f"induced: entry {x.id}@{lvl} targets non-special {c.id}")
                    hops = 0
                    w = c
                    while w is not None and w is not x and hops < 100000:
                        w = w.parent
                        hops += 1
                    if w is not x:
                        errors.append(f"induced: entry {x.id}@{lvl} does not reach up to {x.id}")
                    elif hops > limit:
                        errors.append(
                            f"induced: entry {x.id}@{lvl} spans {hops} hops > {limit}")
            if x.ind_asc:
                for lvl, pnode in x.ind_asc.items():
                    if pnode.ind_desc is None or pnode.ind_desc.get(lvl) is not x:
                        errors.append(
                            f"induced: upward entry {x.id}@{lvl} lacks its mirror")
