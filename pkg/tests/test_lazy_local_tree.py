"""Heavy/light split, buffers, bottoms, and tops of the improved variant."""

from __future__ import annotations

import random

from dynconn import ConnectivityEngine, EngineConfig
from dynconn.config import derive_params
from dynconn.lazy_local_tree import LightTree, is_heavy
from dynconn.nodes import K_CNODE, TAG_BOTTOM, TAG_BUFFER


def test_heavy_threshold_boundary():
    # n=1024, epsilon=0.5: h=2, so heavy means child >= parent/4
    params = derive_params(1024, EngineConfig())
    assert params.h == 2
    assert is_heavy(params, 256, 1024)
    assert not is_heavy(params, 255, 1024)


def test_whole_parent_is_always_heavy():
    for n in (2, 7, 64, 4096):
        params = derive_params(n, EngineConfig())
        for k in (1, 3, n):
            assert is_heavy(params, k, k)


def test_threshold_clamps_below_one():
    # parent smaller than 2^h: the shifted threshold would hit zero, every
    # child passes through the clamp; first light size-1 child needs the
    # shifted threshold to reach 2
    params = derive_params(1024, EngineConfig())
    assert params.h == 2
    assert is_heavy(params, 1, 2)
    assert is_heavy(params, 1, 7)
    assert not is_heavy(params, 1, 8)


def iter_light_trees(eng: ConnectivityEngine):
    seen = set()
    for root in eng.forest.all_roots():
        stack = [root]
        while stack:
            x = stack.pop()
            if x.kind == K_CNODE and isinstance(x.tree, LightTree):
                if id(x.tree) not in seen:
                    seen.add(id(x.tree))
                    yield x, x.tree
            for kid in eng.forest.c_children(x) if x.kind == K_CNODE else ():
                stack.append(kid)


def test_star_fills_buffer_then_converts_once():
    """Adds past the buffer capacity trigger exactly one bottom conversion."""
    n = 2048
    eng = ConnectivityEngine(n, variant="improved")
    cap = eng.params.buffer_cap
    assert cap == 1024
    # the center's own leaf is the root's first light child, so the buffer
    # crosses cap when spoke number cap arrives
    for spoke in range(1, cap):
        eng.insert(0, spoke)
    assert eng.counters.bottom_conversions == 0
    eng.insert(0, cap)
    assert eng.counters.bottom_conversions == 1
    for spoke in range(cap + 1, cap + 40):
        eng.insert(0, spoke)
    assert eng.counters.bottom_conversions == 1
    assert eng.validate() == []


def test_demotion_lands_in_buffer():
    # two size-4 cliques joined: each root's former heavy children shrink
    # relative to the doubled parent and must land in the light zone
    n = 64
    eng = ConnectivityEngine(n, variant="improved", config=EngineConfig(alpha=1.0))
    rng = random.Random(5)
    for _ in range(900):
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v and not eng.store.has_edge(u, v):
            eng.insert(u, v)
    assert eng.validate() == []
    saw_light = 0
    params = eng.params
    for owner, light in iter_light_trees(eng):
        for m in light.bufw.lt.iter_leaves():
            saw_light += 1
            assert m.slot_tag == TAG_BUFFER
            assert not is_heavy(params, m.size, owner.size)
    assert saw_light > 0


def test_top_tree_leaf_ranks_distinct():
    """After random churn every top tree holds pairwise distinct ranks."""
    n = 64
    eng = ConnectivityEngine(n, variant="improved", config=EngineConfig(alpha=1.0))
    rng = random.Random(11)
    present: set[tuple[int, int]] = set()
    for _ in range(3000):
        r = rng.random()
        if r < 0.55 or not present:
            u, v = rng.randrange(n), rng.randrange(n)
            if u == v or (min(u, v), max(u, v)) in present:
                continue
            eng.insert(u, v)
            present.add((min(u, v), max(u, v)))
        else:
            u, v = rng.choice(sorted(present))
            eng.delete(u, v)
            present.discard((u, v))
    assert eng.validate() == []
    tops = 0
    for _, light in iter_light_trees(eng):
        buffer_root = light.bufw.lt.root
        ranks = []
        for m in light.top.iter_leaves():
            if m is buffer_root:
                continue  # live buffer sentinel sits below every rank
            tops += 1
            assert m.bot_root
            ranks.append(m.ranked_value())
        assert len(ranks) == len(set(ranks))
    # the workload is dense enough that bottoms actually exist
    assert eng.counters.bottom_conversions > 0


def test_bottom_members_shrink_only():
    """Bottom trees never grow: members only leave, and evictions repair ranks."""
    n = 48
    eng = ConnectivityEngine(n, variant="improved", config=EngineConfig(alpha=1.0))
    rng = random.Random(3)
    present: set[tuple[int, int]] = set()
    # wrapper object pinned alongside its count so ids are never recycled
    sizes: dict[int, tuple[object, int]] = {}
    for step in range(4000):
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
        for _, light in iter_light_trees(eng):
            buffer_root = light.bufw.lt.root
            for m in light.top.iter_leaves():
                if m is buffer_root or not m.bot_root:
                    continue
                wrapper = m.tree if m.kind != K_CNODE else m.slot_ref
                count = sum(1 for _ in _bottom_members(m))
                prev = sizes.get(id(wrapper))
                if prev is not None:
                    assert count <= prev[1], f"bottom grew at step {step}"
                sizes[id(wrapper)] = (wrapper, count)
    assert eng.validate() == []


def _bottom_members(root):
    stack = [root]
    while stack:
        x = stack.pop()
        if x.slot_tag == TAG_BOTTOM and x.kind == K_CNODE:
            yield x
            continue
        stack.extend(x.children())
