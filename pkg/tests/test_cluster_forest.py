"""Local-tree pairing shape, driven both synthetically and through the engine."""

from __future__ import annotations

import itertools

from dynconn import ConnectivityEngine
from dynconn.nodes import K_RPATH, Node


def carry_pair(ranks: list[int]) -> list[int]:
    """Reference pairing: combine equal ranks until all are distinct."""
    counts: dict[int, int] = {}
    for r in ranks:
        counts[r] = counts.get(r, 0) + 1
    r = 0
    top = max(counts) if counts else -1
    out = []
    while r <= top:
        c = counts.get(r, 0)
        if c >= 2:
            counts[r + 1] = counts.get(r + 1, 0) + c // 2
            top = max(top, r + 1)
            c %= 2
        if c:
            out.append(r)
        r += 1
    return out[::-1]  # descending, matching the mount order


def mounted_rank_roots(u: Node) -> list[int]:
    """Ranks of the rank-tree roots hanging off u, top of the rank path first."""
    a, b = u.left, u.right
    if a is None and b is None:
        return []
    if b is None:
        return [a.ranked_value()]
    if b.kind != K_RPATH:
        ra, rb = a.ranked_value(), b.ranked_value()
        if ra == rb:
            # lone pairing root was unpacked into u itself
            return [ra + 1]
        return [ra, rb]
    out = [a.ranked_value()]
    node = b
    while True:
        x, y = node.left, node.right
        out.append(x.ranked_value())
        if y.kind != K_RPATH:
            out.append(y.ranked_value())
            return out
        node = y


def build_parent(structure, forest, sizes):
    p = forest.new_cnode(0)
    kids = []
    for s in sizes:
        c = forest.new_cnode(1)
        c.size = s
        p.size += s
        structure.attach_child(p, c)
        kids.append(c)
    return p, kids


def scaffolding():
    eng = ConnectivityEngine(4, variant="simple")
    return eng.structure, eng.forest


def test_merge_of_two_singletons_has_rank_one():
    eng = ConnectivityEngine(4, variant="simple")
    eng.insert(0, 1)
    root = eng.forest.root_of(eng.forest.leaves[0])
    assert root.size == 2
    assert root.ranked_value() == 1


def test_all_child_multisets_up_to_six():
    """Mounted rank-tree roots must match the reference pairing exactly."""
    structure, forest = scaffolding()
    for k in range(1, 7):
        for sizes in itertools.combinations_with_replacement((1, 2, 3, 4, 6, 9), k):
            p, _ = build_parent(structure, forest, list(sizes))
            errs: list[str] = []
            structure._check_local_shape(p, errs)
            assert not errs, (sizes, errs)
            want = carry_pair([(s).bit_length() - 1 for s in sizes])
            assert mounted_rank_roots(p) == want, sizes


def test_detach_matches_repairing_oracle():
    # detach from {1,1,2,2,2}: remaining multiset re-pairs like from scratch
    structure, forest = scaffolding()
    sizes = [1, 1, 2, 2, 2]
    p, kids = build_parent(structure, forest, sizes)
    for gone_at in range(5):
        structure, forest = scaffolding()
        p, kids = build_parent(structure, forest, sizes)
        c = kids[gone_at]
        p.size -= c.size
        structure.remove_child(p, c)
        errs: list[str] = []
        structure._check_local_shape(p, errs)
        assert not errs, errs
        left = sizes[:gone_at] + sizes[gone_at + 1 :]
        assert sorted(mounted_rank_roots(p)) == sorted(
            carry_pair([(s).bit_length() - 1 for s in left])
        )


def test_detach_only_child_leaves_empty_tree():
    structure, forest = scaffolding()
    p, kids = build_parent(structure, forest, [3])
    p.size -= 3
    structure.remove_child(p, kids[0])
    assert p.left is None and p.right is None


def test_rank_path_strictly_descending_under_churn():
    structure, forest = scaffolding()
    p, kids = build_parent(structure, forest, [1, 1, 1])
    for s in (2, 8, 2, 1, 4, 16, 1, 1):
        c = forest.new_cnode(1)
        c.size = s
        p.size += s
        structure.attach_child(p, c)
        kids.append(c)
        roots = mounted_rank_roots(p)
        assert roots == sorted(set(roots), reverse=True)
    while len(kids) > 1:
        c = kids.pop()
        p.size -= c.size
        structure.remove_child(p, c)
        errs: list[str] = []
        structure._check_local_shape(p, errs)
        assert not errs
        roots = mounted_rank_roots(p)
        assert roots == sorted(set(roots), reverse=True)


def test_ancestor_at_level_equals_parent_walk():
    eng = ConnectivityEngine(16, variant="simple")
    edges = [(i, i + 1) for i in range(15)]
    for u, v in edges:
        eng.insert(u, v)
    for i in (0, 3, 14):
        eng.delete(i, i + 1) if i < 15 and eng.store.has_edge(i, i + 1) else None
    forest = eng.forest
    for leaf in forest.leaves:
        walk = leaf
        while forest.c_parent(walk) is not None:
            walk = forest.c_parent(walk)
        assert eng.structure.ancestor_at_level(leaf, 0) is walk
