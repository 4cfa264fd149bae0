"""Leaf-oriented weight-balanced search trees for buffer, bottom, and top trees.

Member leaves are foreign nodes (cluster children, or rank roots in a top
tree); interiors are created and destroyed here. Keys are computed by a key
function, never stored on leaves, so identity moves need no key rewrite.
Interior separators keep routing correct even when the separating leaf is
long gone. Rebalancing rebuilds the highest out-of-balance subtree in place,
reusing the interior pool so the subtree root keeps its identity.

Depth convention: a member's stored tdepth is its depth inside this tree,
except the tree's own root, whose tdepth slot belongs to whatever outer
structure uses the root as a member (a buffer root is a top-tree leaf).
The tree's root keeps whatever outer parent pointer the container wired;
when the root identity changes, the outer pointer is moved mechanically
and a root_swap event tells the container to update its wrapper.
"""

from __future__ import annotations

from collections.abc import Callable, Iterator

from .counters import Counters
from .nodes import Node

BALANCE_NUM = 3  # subtree is rebuilt when one side exceeds 3/4 of the leaves
BALANCE_DEN = 4


class LeafTree:
    __slots__ = (
        "kind",
        "keyfn",
        "tree_ref",
        "root",
        "count",
        "counters",
        "events",
        "claims",
        "_ids",
    )

    def __init__(
        self,
        kind: int,
        keyfn: Callable[[Node], tuple],
        counters: Counters,
        events,
        make_id: Callable[[], int],
        claims: bool = True,
    ) -> None:
        self.kind = kind
        self.keyfn = keyfn
        self.tree_ref = None  # wrapper; set by the container before use
        self.root = None
        self.count = 0
        self.counters = counters
        self.events = events
        # A claiming tree owns its members' tree pointers. The top tree does
        # not claim: its members are roots of other trees and keep theirs.
        self.claims = claims
        self._ids = make_id

    # -- depth and membership helpers ------------------------------------------

    def depth_of(self, node: Node) -> int:
        return 0 if node is self.root else node.tdepth

    def _set_depths(self, node: Node, depth: int) -> None:
        stack = [(node, depth)]
        while stack:
            cur, d = stack.pop()
            if cur is not self.root:
                cur.tdepth = d
            if self._is_interior(cur):
                stack.append((cur.left, d + 1))
                stack.append((cur.right, d + 1))

    def _is_interior(self, node: Node) -> bool:
        return node.kind == self.kind and node.tree is self.tree_ref

    # -- queries -----------------------------------------------------------------

    def is_empty(self) -> bool:
        return self.root is None

    def leaf_count(self) -> int:
        return self.count

    def iter_leaves(self) -> Iterator[Node]:
        node = self.root
        if node is None:
            return
        stack = [node]
        while stack:
            cur = stack.pop()
            if self._is_interior(cur):
                stack.append(cur.right)
                stack.append(cur.left)
            else:
                yield cur

    def find(self, key: tuple) -> Node | None:
        node = self.root
        if node is None:
            return None
        while self._is_interior(node):
            node = node.left if key <= node.skey else node.right
        return node if self.keyfn(node) == key else None

    def max_leaf(self) -> Node | None:
        node = self.root
        if node is None:
            return None
        while self._is_interior(node):
            node = node.right
        return node

    def collect_ge(self, key: tuple) -> list[Node]:
        """All leaves with key >= the bound, in ascending key order."""
        out: list[Node] = []

        def walk(node: Node) -> None:
            if self._is_interior(node):
                if key <= node.skey:
                    walk(node.left)
                walk(node.right)
            elif self.keyfn(node) >= key:
                out.append(node)

        if self.root is not None:
            walk(self.root)
        return out

    # -- mutations -----------------------------------------------------------------

    def insert(self, leaf: Node) -> None:
        if self.claims:
            leaf.tree = self.tree_ref
        self.count += 1
        if self.root is None:
            self.root = leaf
            leaf.parent = None
            leaf.tdepth = 0
            if self.events is not None:
                self.events.touched(leaf)
            return
        key = self.keyfn(leaf)
        node = self.root
        while self._is_interior(node):
            node.size += 1
            node = node.left if key <= node.skey else node.right
        sib = node
        sib_key = self.keyfn(sib)
        outer = sib.parent
        was_root = sib is self.root
        joint = Node(self._ids(), self.kind)
        joint.tree = self.tree_ref
        joint.size = 2
        self.counters.bbst_nodes_created += 1
        if key <= sib_key:
            joint.left, joint.right, joint.skey = leaf, sib, key
        else:
            joint.left, joint.right, joint.skey = sib, leaf, sib_key
        leaf.parent = joint
        sib.parent = joint
        joint.parent = outer
        if was_root:
            joint.tdepth = sib.tdepth  # outer-owned slot moves with the position
            self.root = joint
            if outer is not None:
                outer.replace_child(sib, joint)
        else:
            joint.tdepth = sib.tdepth
            outer.replace_child(sib, joint)
        if self.events is not None:
            self.events.made(joint)
            if was_root:
                self.events.root_swap(sib, joint, self)
        self._set_depths(joint, self.depth_of(joint))
        if self.events is not None:
            self.events.reshaped(joint, self)
        self._rebalance_path(joint)

    def remove(self, leaf: Node) -> None:
        self.count -= 1
        if leaf is self.root:
            # container unlinks the outer side and clears its wrapper
            self.root = None
            leaf.parent = None
            if self.claims:
                leaf.tree = None
            return
        joint = leaf.parent
        sib = joint.left if joint.right is leaf else joint.right
        outer = joint.parent
        was_root = joint is self.root
        sib.parent = outer
        sib.tdepth = joint.tdepth
        if was_root:
            self.root = sib
            if outer is not None:
                outer.replace_child(joint, sib)
        else:
            outer.replace_child(joint, sib)
            node = outer
            while node is not None and self._is_interior(node):
                node.size -= 1
                if node is self.root:
                    break
                node = node.parent
        joint.left = joint.right = joint.parent = None
        joint.tree = None
        self.counters.bbst_nodes_deleted += 1
        leaf.parent = None
        if self.claims:
            leaf.tree = None
        if self.events is not None:
            self.events.gone(joint)
            if was_root:
                self.events.root_swap(joint, sib, self)
        self._set_depths(sib, self.depth_of(sib))
        if self.events is not None:
            self.events.reshaped(sib, self)
        if not was_root and outer is not None:
            self._rebalance_path(outer)

    def replace_root_member(self, old: Node, new: Node) -> None:
        """Swap identity at the root position (single-member trees only)."""
        assert self.root is old and not self._is_interior(old)
        outer = old.parent
        if self.claims:
            new.tree = self.tree_ref
        new.parent = outer
        new.tdepth = old.tdepth
        if outer is not None:
            outer.replace_child(old, new)
        old.parent = None
        if self.claims:
            old.tree = None
        self.root = new

    def destroy_all(self) -> list[Node]:
        """Drop every interior and return the member leaves in key order.

        The container must have unlinked the root from any outer structure.
        """
        leaves = list(self.iter_leaves())
        node = self.root
        stack = [node] if node is not None else []
        while stack:
            cur = stack.pop()
            if self._is_interior(cur):
                stack.append(cur.left)
                stack.append(cur.right)
                cur.left = cur.right = cur.parent = None
                cur.tree = None
                self.counters.bbst_nodes_deleted += 1
                if self.events is not None:
                    self.events.gone(cur)
            else:
                cur.parent = None
                if self.claims:
                    cur.tree = None
        self.root = None
        self.count = 0
        return leaves

    def convert(self, kind: int, tree_ref) -> None:
        """Retag every member for a new role (a buffer becoming a bottom tree)."""
        old_kind = self.kind
        old_ref = self.tree_ref
        members: list[Node] = []
        stack = [self.root] if self.root is not None else []
        while stack:
            cur = stack.pop()
            members.append(cur)
            if cur.kind == old_kind and cur.tree is old_ref:
                stack.append(cur.left)
                stack.append(cur.right)
        for cur in members:
            if cur.kind == old_kind and cur.tree is old_ref:
                cur.kind = kind
                cur.tree = tree_ref
            elif self.claims:
                cur.tree = tree_ref
        self.kind = kind
        self.tree_ref = tree_ref

    # -- internals --------------------------------------------------------------------

    def _rebalance_path(self, start: Node) -> None:
        worst = None
        node = start
        while node is not None and self._is_interior(node):
            ls = node.left.size if self._is_interior(node.left) else 1
            rs = node.right.size if self._is_interior(node.right) else 1
            if BALANCE_DEN * max(ls, rs) > BALANCE_NUM * (ls + rs):
                worst = node
            if node is self.root:
                break
            node = node.parent
        if worst is not None:
            self._rebuild(worst)

    def _rebuild(self, top: Node) -> None:
        leaves: list[Node] = []
        pool: list[Node] = []
        stack = [top]
        while stack:
            cur = stack.pop()
            if self._is_interior(cur):
                pool.append(cur)
                stack.append(cur.right)
                stack.append(cur.left)
            else:
                leaves.append(cur)
        # keep the old subtree root identity at the top of the rebuilt subtree
        pool.remove(top)
        pool.insert(0, top)
        slot_parent = top.parent
        depth_slot = top.tdepth
        keys = [self.keyfn(leaf) for leaf in leaves]
        counter = {"i": 0}

        def build(lo: int, hi: int) -> Node:
            if lo == hi:
                return leaves[lo]
            node = pool[counter["i"]]
            counter["i"] += 1
            mid = (lo + hi + 1) // 2
            left = build(lo, mid - 1)
            right = build(mid, hi)
            node.left, node.right = left, right
            left.parent = node
            right.parent = node
            node.skey = keys[mid - 1]
            node.size = hi - lo + 1
            return node

        new_top = build(0, len(leaves) - 1)
        assert new_top is top
        new_top.parent = slot_parent
        new_top.tdepth = depth_slot
        self._set_depths(new_top, self.depth_of(new_top))
        if self.events is not None:
            self.events.reshaped(new_top, self)
