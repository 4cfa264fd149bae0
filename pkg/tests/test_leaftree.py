"""Standalone checks of the weight-balanced member tree.

Members here are bare leaf nodes keyed by their vertex field, so the tree
can be driven directly without the rest of the forest machinery.
"""

from __future__ import annotations

import itertools

from hypothesis import given
from hypothesis import strategies as st

from dynconn.counters import Counters
from dynconn.leaftree import BALANCE_DEN, BALANCE_NUM, LeafTree
from dynconn.nodes import K_BUF, K_LEAF, Node


class Sink:
    """Event recorder standing in for the owning light tree."""

    def __init__(self) -> None:
        self.swaps: list[tuple[int, int]] = []

    def touched(self, x: Node) -> None:
        pass

    def made(self, x: Node) -> None:
        pass

    def gone(self, x: Node) -> None:
        pass

    def root_swap(self, old: Node, new: Node, lt: LeafTree) -> None:
        self.swaps.append((old.id, new.id))

    def reshaped(self, x: Node, lt: LeafTree) -> None:
        pass


def make_tree(sink: Sink | None = None) -> tuple[LeafTree, Counters]:
    counters = Counters()
    ids = itertools.count(10_000)
    t = LeafTree(
        K_BUF,
        lambda m: (m.vertex,),
        counters,
        sink or Sink(),
        lambda: next(ids),
        claims=True,
    )
    t.tree_ref = t
    return t, counters


def leaf(i: int) -> Node:
    x = Node(i, K_LEAF)
    x.vertex = i
    return x


def check_shape(t: LeafTree) -> None:
    """Interior bookkeeping must match a direct recomputation."""
    if t.root is None:
        assert t.count == 0
        return
    seen = []

    def walk(x: Node, depth: int) -> int:
        if x.kind == K_LEAF:
            seen.append(x.vertex)
            if x is not t.root:
                assert x.tdepth == depth
            return 1
        left = walk(x.left, depth + 1)
        right = walk(x.right, depth + 1)
        total = left + right
        assert x.size == total
        # weight balance: neither side beyond BALANCE_NUM/BALANCE_DEN
        assert left * BALANCE_DEN <= BALANCE_NUM * total
        assert right * BALANCE_DEN <= BALANCE_NUM * total
        return total

    assert walk(t.root, 0) == t.count
    assert seen == sorted(seen)


def test_insert_remove_find():
    t, _ = make_tree()
    members = [leaf(i) for i in (5, 2, 9, 1, 7, 3)]
    for m in members:
        t.insert(m)
        check_shape(t)
    assert t.count == 6
    assert t.find((7,)) is members[4]
    assert t.find((4,)) is None
    assert t.max_leaf() is members[2]
    assert [m.vertex for m in t.iter_leaves()] == [1, 2, 3, 5, 7, 9]
    t.remove(members[2])
    check_shape(t)
    assert t.max_leaf().vertex == 7
    assert t.find((9,)) is None


def test_collect_ge():
    t, _ = make_tree()
    for i in (4, 8, 1, 6, 2):
        t.insert(leaf(i))
    got = sorted(m.vertex for m in t.collect_ge((4,)))
    assert got == [4, 6, 8]
    assert t.collect_ge((9,)) == []


def test_remove_to_empty_and_rebuild():
    t, _ = make_tree()
    members = [leaf(i) for i in range(9)]
    for m in members:
        t.insert(m)
    for m in members:
        t.remove(m)
        check_shape(t)
    assert t.is_empty()
    for m in members:
        t.insert(m)
    check_shape(t)
    assert t.leaf_count() == 9


def test_destroy_all_returns_members_and_frees_interiors():
    t, counters = make_tree()
    for i in range(7):
        t.insert(leaf(i))
    created = counters.bbst_nodes_created
    assert created > 0
    out = t.destroy_all()
    assert sorted(m.vertex for m in out) == list(range(7))
    assert t.is_empty()
    assert counters.bbst_nodes_deleted == created


def test_root_swap_event_fires_on_root_identity_change():
    sink = Sink()
    t, _ = make_tree(sink)
    a = leaf(1)
    t.insert(a)
    assert t.root is a
    t.insert(leaf(2))
    # singleton root was replaced by an interior
    assert sink.swaps and sink.swaps[0][0] == a.id


@given(st.lists(st.integers(0, 120), max_size=70))
def test_random_sequences_stay_balanced(ops):
    t, _ = make_tree()
    live: dict[int, Node] = {}
    for key in ops:
        if key in live:
            t.remove(live.pop(key))
        else:
            m = leaf(key)
            live[key] = m
            t.insert(m)
        check_shape(t)
        assert t.count == len(live)
    assert sorted(m.vertex for m in t.iter_leaves()) == sorted(live)
