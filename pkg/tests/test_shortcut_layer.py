"""Coloring rules, black-induced links, and shortcut ascent."""

from __future__ import annotations

import random

from dynconn import ConnectivityEngine, EngineConfig
from dynconn.config import derive_params
from dynconn.counters import Counters
from dynconn.cluster_forest import Forest
from dynconn.nodes import (
    B_LEVEL,
    K_CNODE,
    K_RANK,
    Node,
)
from dynconn.shortcut_layer import ShortcutLayer, Tracker, first_black_above


def bare_layer(n: int) -> ShortcutLayer:
    params = derive_params(n, EngineConfig())
    counters = Counters()
    forest = Forest(params, counters)
    return ShortcutLayer(forest, params, counters, Tracker())


def test_spaced_levels_black_at_large_n():
    # n=2^16 gives s=2: even cluster levels carry rule 1
    layer = bare_layer(1 << 16)
    assert layer.params.s == 2
    for level, want in ((0, True), (1, False), (2, True), (3, False), (4, True)):
        x = Node(10_0000 + level, K_CNODE)
        x.level = level
        x.size = 2
        black, btypes = layer.classify_color(x)
        assert black == want, level
        if want:
            assert btypes & B_LEVEL


def test_equal_rank_gap_is_white():
    # rank 5 under rank-5 ancestor: no multiple of 2 inside [5,5)
    layer = bare_layer(1 << 16)
    parent = Node(1, K_RANK)
    parent.rank = 5
    child = Node(2, K_RANK)
    child.rank = 5
    parent.left = child
    child.parent = parent
    black, _ = layer.classify_color(child)
    assert not black


def test_crossed_rank_gap_is_black():
    layer = bare_layer(1 << 16)
    parent = Node(1, K_RANK)
    parent.rank = 8
    child = Node(2, K_RANK)
    child.rank = 5
    parent.left = child
    child.parent = parent
    black, _ = layer.classify_color(child)
    assert black  # 6 lies in [5,8)


def churned_engine(n: int, seed: int, steps: int) -> ConnectivityEngine:
    eng = ConnectivityEngine(n, variant="improved", config=EngineConfig(alpha=1.0))
    rng = random.Random(seed)
    present: set[tuple[int, int]] = set()
    for _ in range(steps):
        r = rng.random()
        if r < 0.5 or not present:
            u, v = rng.randrange(n), rng.randrange(n)
            if u == v or (min(u, v), max(u, v)) in present:
                continue
            eng.insert(u, v)
            present.add((min(u, v), max(u, v)))
        else:
            u, v = rng.choice(sorted(present))
            eng.delete(u, v)
            present.discard((u, v))
    return eng


def all_nodes(eng: ConnectivityEngine) -> list[Node]:
    out = []
    for root in eng.forest.all_roots():
        stack = [root]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(x.children())
    return out


def test_black_links_match_walk_recomputation():
    """Stored bip/bic equal a from-scratch parent-chain scan."""
    for seed in (1, 2, 3):
        eng = churned_engine(32, seed, 400)
        nodes = all_nodes(eng)
        blacks = [x for x in nodes if x.black]
        want_bic: dict[int, set[int]] = {x.id: set() for x in blacks}
        for x in blacks:
            up = first_black_above(x)
            got_bip = x.bip.id if x.bip is not None else None
            assert got_bip == (up.id if up is not None else None), x.id
            if up is not None:
                want_bic[up.id].add(x.id)
        for y in blacks:
            have = set(y.bic) if y.bic else set()
            assert have == want_bic[y.id], y.id


def test_colors_match_rule_recomputation():
    for seed in (4, 5):
        eng = churned_engine(32, seed, 400)
        layer = eng.structure.layer
        for x in all_nodes(eng):
            black, btypes = layer.classify_color(x)
            assert (x.black, x.btypes) == (black, btypes), x.id


def test_bitmaps_match_leaf_or():
    from dynconn.cluster_forest import leaf_edge_mask
    from dynconn.nodes import K_LEAF

    for seed in (6, 7):
        eng = churned_engine(32, seed, 500)
        for x in all_nodes(eng):
            if not x.black:
                continue
            want = 0
            stack = [x]
            while stack:
                y = stack.pop()
                if y.kind == K_LEAF:
                    want |= leaf_edge_mask(y)
                else:
                    stack.extend(y.children())
            assert x.ebits == want, x.id


def test_ascend_matches_parent_walk():
    for seed in (8, 9):
        eng = churned_engine(48, seed, 700)
        forest = eng.forest
        lmax = eng.params.lmax
        for leaf in forest.leaves:
            by_level: dict[int, Node] = {}
            x = forest.c_parent(leaf)
            while x is not None:
                by_level[x.level] = x
                x = forest.c_parent(x)
            deepest = max(by_level) if by_level else -1
            for j in range(lmax + 1):
                # above the deepest enclosing cluster the leaf is a singleton
                want = by_level[j] if j <= deepest else leaf
                assert eng.structure.vertex_cluster_at(leaf, j) is want
            if deepest >= 0:
                assert eng.structure.ancestor_at_level(leaf, 0) is by_level[0]
