from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynconn.counters import Counters
from dynconn.errors import (
    DuplicateEdge,
    LevelOverflow,
    NoSuchEdge,
    SelfLoop,
    VertexOutOfRange,
)
from dynconn.graph_store import GraphStore, edge_key


def store(n: int, lmax: int = 3) -> GraphStore:
    return GraphStore(n, lmax, Counters())


def test_insert_starts_at_level_zero():
    s = store(4)
    rec = s.insert_edge(0, 1)
    assert rec.level == 0
    assert s.level_of(0, 1) == 0


def test_insert_rejects_self_loop():
    s = store(4)
    with pytest.raises(SelfLoop):
        s.insert_edge(2, 2)


def test_insert_rejects_duplicate():
    s = store(4)
    s.insert_edge(0, 1)
    with pytest.raises(DuplicateEdge):
        s.insert_edge(1, 0)


def test_vertex_range_checked():
    s = store(4)
    with pytest.raises(VertexOutOfRange):
        s.insert_edge(0, 4)
    with pytest.raises(VertexOutOfRange):
        s.check_vertex(-1)


def test_delete_returns_stored_level():
    s = store(4)
    s.insert_edge(0, 1)
    assert s.delete_edge(0, 1).level == 0
    with pytest.raises(NoSuchEdge):
        s.delete_edge(0, 3)


def test_promote_moves_groups():
    s = store(8)
    s.insert_edge(0, 1)
    s.insert_edge(0, 2)
    key = edge_key(0, 1)
    assert s.promote_edge(key) == 1
    assert s.edges_at_level(0, 0) == (edge_key(0, 2),)
    assert s.edges_at_level(0, 1) == (key,)
    assert s.edges_at_level(1, 0) == ()
    assert s.edges_at_level(1, 1) == (key,)
    assert s.level_of(0, 1) == 1


def test_promote_overflow_at_lmax():
    # n=8 gives lmax=3
    s = store(8)
    s.insert_edge(0, 1)
    key = edge_key(0, 1)
    for want in (1, 2, 3):
        assert s.promote_edge(key) == want
    with pytest.raises(LevelOverflow):
        s.promote_edge(key)


def test_groups_by_level_direct():
    s = store(8)
    s.insert_edge(4, 1)
    s.insert_edge(4, 2)
    s.promote_edge(edge_key(4, 2))
    s.promote_edge(edge_key(4, 2))
    assert s.edges_at_level(4, 2) == (edge_key(4, 2),)
    assert s.edges_at_level(4, 0) == (edge_key(4, 1),)
    assert s.edges_at_level(3, 0) == ()
    assert s.incident_levels_mask(4) == 0b101
    assert s.incident_levels_mask(3) == 0


def test_counts():
    s = store(8)
    s.insert_edge(0, 1)
    s.insert_edge(1, 2)
    assert s.edge_count() == 2
    assert s.degree(1) == 2
    assert s.has_edge(2, 1)
    assert not s.has_edge(0, 2)
    assert sorted(s.all_edges()) == [(0, 1), (1, 2)]


@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), max_size=80))
def test_store_mirrors_reference_dict(pairs):
    """Groups, masks, and degrees always match a plain recomputation."""
    s = store(10)
    ref: dict[tuple[int, int], int] = {}
    for u, v in pairs:
        if u == v:
            continue
        k = edge_key(u, v)
        if k in ref:
            lv = ref[k]
            if lv < s.lmax and (u + v) % 2:
                s.promote_edge(k)
                ref[k] = lv + 1
            else:
                s.delete_edge(u, v)
                del ref[k]
        else:
            s.insert_edge(u, v)
            ref[k] = 0
    assert sorted(s.all_edges()) == sorted(ref)
    for v in range(10):
        want_mask = 0
        deg = 0
        for (a, b), lv in ref.items():
            if v in (a, b):
                want_mask |= 1 << lv
                deg += 1
        assert s.incident_levels_mask(v) == want_mask
        assert s.degree(v) == deg
        for lv in range(s.lmax + 1):
            got = sorted(s.edges_at_level(v, lv))
            want = sorted(k for k, l in ref.items() if v in k and l == lv)
            assert got == want
            assert s.has_edges_at_level(v, lv) == bool(want)
