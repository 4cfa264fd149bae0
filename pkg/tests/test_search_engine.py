"""End-to-end engine behavior on small frozen traces and randomized runs."""

from __future__ import annotations

import random

import pytest

from dynconn import ConnectivityEngine, DuplicateEdge, SelfLoop, VertexOutOfRange
from dynconn.nodes import K_LEAF
from dynconn.validation import UnionFind


VARIANTS = ("simple", "improved")


@pytest.mark.parametrize("variant", VARIANTS)
def test_reflexive_and_empty(variant):
    eng = ConnectivityEngine(4, variant=variant)
    assert eng.connected(3, 3)
    assert not eng.connected(0, 1)


@pytest.mark.parametrize("variant", VARIANTS)
def test_path_query_and_split(variant):
    eng = ConnectivityEngine(3, variant=variant)
    eng.insert(0, 1)
    eng.insert(1, 2)
    assert eng.connected(0, 2)
    eng.delete(1, 2)
    assert not eng.connected(0, 2)
    assert eng.connected(0, 1)


@pytest.mark.parametrize("variant", VARIANTS)
def test_first_insert_builds_one_root(variant):
    eng = ConnectivityEngine(2, variant=variant)
    eng.insert(0, 1)
    roots = eng.forest.all_roots()
    assert len(roots) == 1
    assert roots[0].size == 2
    assert eng.counters.cluster_merges == 1
    assert eng.counters.promotions == 0


@pytest.mark.parametrize("variant", VARIANTS)
def test_preconditions(variant):
    eng = ConnectivityEngine(4, variant=variant)
    with pytest.raises(SelfLoop):
        eng.insert(1, 1)
    eng.insert(0, 1)
    with pytest.raises(DuplicateEdge):
        eng.insert(1, 0)
    with pytest.raises(VertexOutOfRange):
        eng.connected(0, 9)


@pytest.mark.parametrize("variant", VARIANTS)
def test_four_cycle_promotes_one_edge(variant):
    """Deleting one cycle edge promotes exactly (1,2) to level 1."""
    eng = ConnectivityEngine(4, variant=variant)
    for u, v in ((0, 1), (1, 2), (2, 3), (3, 0)):
        eng.insert(u, v)
    eng.delete(0, 1)
    assert eng.connected(0, 1)
    assert eng.counters.promotions == 1
    assert eng.store.level_of(1, 2) == 1
    assert eng.store.level_of(2, 3) == 0
    assert eng.store.level_of(0, 3) == 0
    assert eng.validate() == []
    # the promoted edge now comes back from delete at its raised level
    assert eng.store.delete_edge(1, 2).level == 1


@pytest.mark.parametrize("variant", VARIANTS)
def test_bridge_delete_promotes_one_triangle(variant):
    """Bridge removal spends three promotions on the searched side, then splits."""
    eng = ConnectivityEngine(6, variant=variant)
    for u, v in ((0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)):
        eng.insert(u, v)
    eng.delete(2, 3)
    assert not eng.connected(0, 5)
    assert eng.connected(0, 2)
    assert eng.connected(3, 5)
    assert eng.counters.promotions == 3
    assert eng.counters.splits == 1
    promoted = sorted(k for k in eng.store.all_edges() if eng.store.level_of(*k) == 1)
    assert promoted == [(0, 1), (0, 2), (1, 2)]
    assert eng.validate() == []


@pytest.mark.parametrize("variant", VARIANTS)
def test_triangle_teardown_to_singletons(variant):
    eng = ConnectivityEngine(3, variant=variant)
    for u, v in ((0, 1), (1, 2), (0, 2)):
        eng.insert(u, v)
    for u, v in ((0, 1), (1, 2), (0, 2)):
        eng.delete(u, v)
    c = eng.counters
    assert c.promotions == 0
    assert c.collisions == 1  # first delete only rewires inside the cluster
    roots = eng.forest.all_roots()
    assert len(roots) == 3
    assert all(r.kind == K_LEAF for r in roots)
    assert all(r.ebits == 0 for r in roots)
    assert c.rank_nodes_created == c.rank_nodes_deleted
    assert c.shortcuts_created == c.shortcuts_deleted
    assert c.cnodes_created == c.cnodes_deleted
    assert eng.validate() == []


@pytest.mark.parametrize("variant", VARIANTS)
def test_insert_only_partition_matches_union_find(variant):
    n = 64
    eng = ConnectivityEngine(n, variant=variant)
    uf = UnionFind(n)
    rng = random.Random(17)
    added = 0
    while added < 1000:
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v or eng.store.has_edge(u, v):
            # saturated component soup still counts toward the budget
            added += 1
            continue
        eng.insert(u, v)
        uf.union(u, v)
        added += 1
    for u in range(0, n, 3):
        for v in range(1, n, 5):
            assert eng.connected(u, v) == (uf.find(u) == uf.find(v))
    assert eng.validate() == []


@pytest.mark.parametrize("variant", VARIANTS)
def test_same_component_insert_keeps_structure(variant):
    eng = ConnectivityEngine(4, variant=variant)
    eng.insert(0, 1)
    eng.insert(1, 2)
    merges = eng.counters.cluster_merges
    cnodes = eng.counters.cnodes_created
    eng.insert(0, 2)  # closes the triangle inside one component
    assert eng.counters.cluster_merges == merges
    assert eng.counters.cnodes_created == cnodes
    assert eng.validate() == []


def test_variants_agree_on_query_stream():
    n = 96
    rng = random.Random(1234)
    engines = {v: ConnectivityEngine(n, variant=v) for v in VARIANTS}
    present: set[tuple[int, int]] = set()
    for _ in range(4000):
        r = rng.random()
        if r < 0.4 or not present:
            u, v = rng.randrange(n), rng.randrange(n)
            if u == v or (min(u, v), max(u, v)) in present:
                continue
            for eng in engines.values():
                eng.insert(u, v)
            present.add((min(u, v), max(u, v)))
        elif r < 0.7:
            u, v = rng.choice(sorted(present))
            for eng in engines.values():
                eng.delete(u, v)
            present.discard((u, v))
        else:
            u, v = rng.randrange(n), rng.randrange(n)
            answers = {v2: eng.connected(u, v) for v2, eng in engines.items()}
            assert answers["simple"] == answers["improved"], (u, v)
