"""Per-level shortcut entries between special nodes.

A sparse "special" subset of the black nodes carries two mirrored tables:
``ind_desc[i]`` points from a special node to the unique special strictly
below it whose subtree holds level-i edges, when exactly one such candidate
exists among its nearest special descendants; ``ind_asc[i]`` is the inverse.
Level-targeted searches use these entries to skip from special to special
instead of scanning black children one by one.

Edge arrivals and departures repair the tables eagerly along one root path;
structural edits go through the shortcut layer's flush, which calls
:meth:`InducedShortcuts.recompute_descending` on every table whose
surroundings changed.
"""

from __future__ import annotations

from .bits import BitSplitter, iter_set_bits
from .cluster_forest import leaf_edge_mask
from .config import Params
from .counters import Counters
from .errors import NoSpecialParent
from .nodes import (
    K_CNODE,
    K_LEAF,
    K_RANK,
    S_LEAF,
    S_LEVEL,
    S_RANK,
    TAG_BOTTOM,
    TAG_BUFFER,
    Node,
)
from .shortcut_layer import special_above


def _subtree_bits(x: Node) -> int:
    # leaves report their announced bits, not raw adjacency: during an edge
    # promotion the storage is ahead of the arrival/departure bookkeeping,
    # and reading it here would leak a level bit past the entry surgery
    if x.kind == K_LEAF:
        return x.ebits
    m = 0
    if x.bic:
        for c in x.bic.values():
            m |= c.ebits
    return m


class InducedShortcuts:
    """Owns the special classification and both shortcut tables."""

    __slots__ = ("params", "counters", "splitter")

    def __init__(self, params: Params, counters: Counters) -> None:
        self.params = params
        self.counters = counters
        self.splitter = BitSplitter(params.lmax + 1)

    # ----------------------------------------------------- classification

    def classify_special(self, x: Node) -> tuple[bool, int]:
        """Special flag and rule bits for a black node."""
        big_s = self.params.big_s
        stypes = 0
        kind = x.kind
        if kind == K_CNODE and x.level % big_s == 0:
            stypes |= S_LEVEL
        if kind == K_LEAF:
            stypes |= S_LEAF
        tag = x.slot_tag
        if (
            tag == TAG_BUFFER
            or tag == TAG_BOTTOM
            or x.bot_root
            or (kind == K_RANK and x.owner is None)
        ):
            if x.ranked_value() % big_s == 0:
                stypes |= S_RANK
        return (stypes != 0, stypes)

    # ----------------------------------------------------------- entries

    def install_entry(self, parent_sp: Node, level: int, child_sp: Node) -> None:
        if parent_sp.ind_desc is None:
            parent_sp.ind_desc = {}
        parent_sp.ind_desc[level] = child_sp
        if child_sp.ind_asc is None:
            child_sp.ind_asc = {}
        child_sp.ind_asc[level] = parent_sp
        self.counters.shortcuts_created += 1

    def drop_entry(self, parent_sp: Node, level: int) -> None:
        child = parent_sp.ind_desc.pop(level)
        if child.ind_asc is not None:
            child.ind_asc.pop(level, None)
        self.counters.shortcuts_deleted += 1

    @staticmethod
    def induced_bits(x: Node) -> int:
        m = 0
        if x.ind_desc:
            for i in x.ind_desc:
                m |= 1 << i
        return m

    # ------------------------------------------------------------ queries

    def i_shortcut_to_special_child(
        self, u: Node, level: int, skip: Node | None = None
    ) -> Node | None:
        """Descend unique level-i carriers from u to the first special.

        Returns the unique nearest special descendant whose subtree holds
        level-i edges, or None when there are zero or several. ``skip``
        pretends one black child subtree is already gone.
        """
        bit = 1 << level
        x = u
        while True:
            carrier = None
            if x.bic:
                for c in x.bic.values():
                    if c is skip or not (c.ebits & bit):
                        continue
                    if carrier is not None:
                        return None
                    carrier = c
            if carrier is None:
                return None
            x = carrier
            if x.special:
                return x

    def shortcuts_to_special_parent(self, u: Node) -> int:
        """Level mask of the entries u's special parent must hold toward u.

        A level qualifies when u's subtree has the bit and nothing else
        under the special parent does.
        """
        if u.bip is None:
            raise NoSpecialParent(f"node #{u.id} has no special ancestor")
        off = 0
        prev = u
        x = u.bip
        while True:
            if x.bic:
                for c in x.bic.values():
                    if c is not prev:
                        off |= c.ebits
            if x.special:
                break
            prev = x
            x = x.bip
            if x is None:
                raise NoSpecialParent(f"node #{u.id} has no special ancestor")
        return u.ebits & ~off

    # --------------------------------------------------------- recompute

    def recompute_descending(self, u: Node) -> None:
        """Rebuild u's descending table from its nearest special descendants."""
        self.counters.table_recomputes += 1
        once = 0
        twice = 0
        frontier: list[Node] = []
        if u.bic:
            # once/twice are set-of-bits aggregates, so visit order is free;
            # subtrees with no announced bits cannot carry an entry
            stack = [c for c in u.bic.values() if c.ebits]
            while stack:
                x = stack.pop()
                if x.special:
                    frontier.append(x)
                    twice |= once & x.ebits
                    once |= x.ebits
                elif x.bic:
                    for c in x.bic.values():
                        if c.ebits:
                            stack.append(c)
        unique = once & ~twice
        # diff against the current table; surviving entries stay untouched
        want: dict[int, Node] = {}
        if unique:
            for v in frontier:
                mask = v.ebits & unique
                for i in iter_set_bits(mask):
                    want[i] = v
        if u.ind_desc:
            for i in list(u.ind_desc):
                if want.get(i) is not u.ind_desc[i]:
                    self.drop_entry(u, i)
        for i, v in want.items():
            if not (u.ind_desc and u.ind_desc.get(i) is v):
                self.install_entry(u, i, v)

    # ----------------------------------------------- edge level arrivals

    def on_level_arrival(self, leaf: Node, level: int) -> None:
        """The vertex of ``leaf`` gained its first level-``level`` edge."""
        bit = 1 << level
        leaf.ebits |= bit
        chain: list[Node] = [leaf]
        stop: Node | None = None
        b = leaf.bip
        while b is not None:
            if b.ebits & bit:
                stop = b
                break
            b.ebits |= bit
            self.counters.bitmap_recomputes += 1
            if b.special:
                chain.append(b)
            b = b.bip
        for j in range(1, len(chain)):
            self.install_entry(chain[j], level, chain[j - 1])
        if stop is None:
            return
        sstar = stop if stop.special else special_above(stop)
        if sstar is not None and sstar.ind_desc and level in sstar.ind_desc:
            # the new carrier is a second candidate below sstar
            self.drop_entry(sstar, level)

    def on_level_departure(self, leaf: Node, level: int) -> None:
        """The vertex of ``leaf`` lost its last level-``level`` edge."""
        bit = 1 << level
        leaf.ebits &= ~bit
        # follow the entry chain up; every hop certified this path as the
        # unique carrier, so those bits die with the edge
        x = leaf
        while x.ind_asc and level in x.ind_asc:
            up = x.ind_asc[level]
            self.drop_entry(up, level)
            x = up
        junction = x
        if junction is leaf:
            b = leaf.bip
        else:
            b = leaf.bip
            while b is not None:
                b.ebits &= ~bit
                self.counters.bitmap_recomputes += 1
                if b is junction:
                    break
                b = b.bip
            b = junction.bip
        # conditional refresh above the certified region
        while b is not None:
            new = _subtree_bits(b)
            if new == b.ebits:
                break
            b.ebits = new
            self.counters.bitmap_recomputes += 1
            b = b.bip
        w = special_above(junction)
        if w is None:
            return
        if not (w.ebits & bit):
            return
        if w.ind_desc and level in w.ind_desc:
            return
        t = self.i_shortcut_to_special_child(w, level)
        if t is not None:
            self.install_entry(w, level, t)

    # ------------------------------------------- restructure-time repairs

    def update_on_root_path(self, path: list[Node], post_update: bool) -> None:
        """Refresh tables along a chain of specials on one root path.

        ``path`` lists consecutive specials bottom-up (each one the special
        parent of its predecessor). With ``post_update`` False, every entry
        touching a path node is dropped ahead of a restructure; with True,
        the tables are rebuilt from the settled surroundings.
        """
        if not path:
            return
        if not post_update:
            for u in path:
                if u.ind_desc:
                    for i in list(u.ind_desc):
                        self.drop_entry(u, i)
                if u.ind_asc:
                    for i in list(u.ind_asc):
                        self.drop_entry(u.ind_asc[i], i)
            return
        base = path[0]
        if base.ind_desc:
            for i in list(base.ind_desc):
                self.drop_entry(base, i)
        for i in iter_set_bits(base.ebits):
            t = self.i_shortcut_to_special_child(base, i)
            if t is not None:
                self.install_entry(base, i, t)
        for j in range(1, len(path)):
            lo = path[j - 1]
            hi = path[j]
            if hi.ind_desc:
                for i in list(hi.ind_desc):
                    self.drop_entry(hi, i)
            mask = self.shortcuts_to_special_parent(lo)
            for i in iter_set_bits(mask):
                self.install_entry(hi, i, lo)
            for i in iter_set_bits(hi.ebits & ~lo.ebits):
                t = self.i_shortcut_to_special_child(hi, i)
                if t is not None:
                    self.install_entry(hi, i, t)

    def update_on_bottom_leaf_removed(self, p: Node, u: Node) -> None:
        """Repair tables around special p before its descendant u departs.

        Call with u still attached; afterwards the tables describe the state
        with u's subtree bits gone. Levels where another carrier branches
        off the u-to-p path only need p's own entry refreshed; levels where
        u was the sole carrier kill a whole ascending chain.
        """
        below = u.ebits
        if not below:
            return
        branch = 0
        prev = u
        x = u.bip
        while True:
            if x is None:
                raise NoSpecialParent(f"node #{u.id} is not below #{p.id}")
            off = 0
            if x.bic:
                for c in x.bic.values():
                    if c is not prev:
                        off |= c.ebits
            branch |= below & off
            if x is p:
                break
            prev = x
            x = x.bip
        for i in self.splitter.bits(below & branch):
            # another carrier remains below p; uniqueness may flip either way
            if p.ind_desc and i in p.ind_desc:
                self.drop_entry(p, i)
            t = self.i_shortcut_to_special_child(p, i, skip=u)
            if t is not None:
                self.install_entry(p, i, t)
        for i in self.splitter.bits(below & ~branch):
            # u was the sole carrier: the certified chain through p dies
            if p.ind_desc and i in p.ind_desc:
                self.drop_entry(p, i)
            elif not (p.ind_asc and i in p.ind_asc):
                continue
            q = p
            while q.ind_asc and i in q.ind_asc:
                up = q.ind_asc[i]
                self.drop_entry(up, i)
                q = up
            w = special_above(q)
            if w is None:
                continue
            t = self.i_shortcut_to_special_child(w, i, skip=u)
            if t is not None and not (w.ind_desc and i in w.ind_desc):
                self.install_entry(w, i, t)


def canonical_entries(
    roots: list[Node], exclude: Node | None = None
) -> dict[tuple[int, int], int]:
    """From-scratch induced table over whole trees: {(parent id, level): child id}.

    Uses only physical child pointers and stored special flags, so it is an
    independent check of the maintained tables. ``exclude`` drops one
    subtree, modeling a detachment that has not happened yet.
    """
    bits: dict[int, int] = {}

    def subtree_mask(node: Node) -> int:
        out = bits.get(node.id)
        if out is not None:
            return out
        stack: list[tuple[Node, bool]] = [(node, False)]
        while stack:
            x, expanded = stack.pop()
            if expanded:
                if x.kind == K_LEAF:
                    m = leaf_edge_mask(x)
                else:
                    m = 0
                    for c in x.children():
                        if c is not exclude:
                            m |= bits[c.id]
                bits[x.id] = m
            else:
                stack.append((x, True))
                for c in x.children():
                    if c is not exclude and c.id not in bits:
                        stack.append((c, False))
        return bits[node.id]

    expected: dict[tuple[int, int], int] = {}
    for root in roots:
        if root is exclude:
            continue
        subtree_mask(root)
        stack = [root]
        while stack:
            u = stack.pop()
            kids = [c for c in u.children() if c is not exclude]
            stack.extend(kids)
            if not u.special:
                continue
            # nearest special descendants and their subtree masks
            once = 0
            twice = 0
            frontier: list[Node] = []
            inner = list(kids)
            while inner:
                x = inner.pop()
                if x.special:
                    m = bits[x.id]
                    frontier.append(x)
                    twice |= once & m
                    once |= m
                else:
                    inner.extend(c for c in x.children() if c is not exclude)
            unique = once & ~twice
            for v in frontier:
                for i in iter_set_bits(bits[v.id] & unique):
                    expected[(u.id, i)] = v.id
    return expected


def collect_entries(nodes: list[Node]) -> dict[tuple[int, int], int]:
    """Stored descending entries of the given nodes, same keying as canonical."""
    out: dict[tuple[int, int], int] = {}
    for u in nodes:
        if u.ind_desc:
            for i, v in u.ind_desc.items():
                out[(u.id, i)] = v.id
    return out
