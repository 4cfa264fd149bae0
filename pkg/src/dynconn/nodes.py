"""Shared node representation for the cluster forest and its local trees.

One mutable class covers every role: cluster nodes, vertex leaves, rank
pairing nodes, rank-path nodes, and the interior nodes of buffer, bottom,
and top trees. Keeping a single layout with __slots__ makes wholesale
subtree adoption an O(1) pointer move and keeps traversal cheap.
"""

from __future__ import annotations

# node kinds
K_CNODE = 0  # cluster node; carries level and vertex count
K_LEAF = 1  # vertex leaf, immortal
K_RANK = 2  # pairing node created when two equal-rank trees join
K_RPATH = 3  # rank-path spine node of a local tree
K_BUF = 4  # buffer-tree interior
K_BOT = 5  # bottom-tree interior
K_TOP = 6  # top-tree interior

KIND_NAMES = {
    K_CNODE: "cnode",
    K_LEAF: "leaf",
    K_RANK: "rank",
    K_RPATH: "rpath",
    K_BUF: "buf",
    K_BOT: "bot",
    K_TOP: "top",
}

# where a cluster child currently sits inside its parent's local tree
TAG_ROOT = 0  # root of a forest tree; no parent structure
TAG_SIMPLE = 1  # member of a flat local tree (simple variant)
TAG_HEAVY = 2  # leaf of the heavy tree of slot_ref (owner cluster node)
TAG_BUFFER = 3  # leaf of the buffer tree slot_ref (wrapper)
TAG_BOTTOM = 4  # leaf of the bottom tree slot_ref (wrapper)

TAG_NAMES = {
    TAG_ROOT: "root",
    TAG_SIMPLE: "simple",
    TAG_HEAVY: "heavy",
    TAG_BUFFER: "buffer",
    TAG_BOTTOM: "bottom",
}

# black classification rule bits
B_LEVEL = 1  # cluster node on a spaced level
B_RANKGAP = 2  # rank node whose gap to the next rank ancestor crosses a spacing
B_LEAF = 4  # leaf of the embedded tree or of a buffer/bottom/top tree
B_DEPTH = 8  # buffer/bottom/top member on a spaced depth

# special classification rule bits
S_LEVEL = 1  # cluster node on a widely spaced level
S_LEAF = 2  # vertex leaf
S_RANK = 4  # light rank structure node on a widely spaced rank


class Node:
    __slots__ = (
        "id",
        "kind",
        "parent",
        "left",
        "right",
        "level",  # cluster level; meaningful for K_CNODE only
        "size",  # K_CNODE: vertex count; BBST interior: member leaf count
        "rank",  # stored rank for K_RANK / K_RPATH / bottom roots
        "vertex",  # K_LEAF: vertex id
        "slot_tag",  # cluster children: TAG_*; placement inside the parent
        "slot_ref",  # owner cluster node or wrapper, per slot_tag
        "tree",  # BBST members and light pairing nodes: wrapper or LightTree
        "owner",  # heavy/simple structure nodes: owning cluster node
        "tdepth",  # depth within the containing buffer/bottom/top tree
        "bot_root",  # True while this node is the root of a bottom tree
        "skey",  # BBST interior: routing separator (max key of left subtree)
        "black",
        "btypes",
        "ebits",  # incident-edge level bitmap (maintained on black nodes)
        "bip",  # nearest black strict ancestor
        "bic",  # black-induced children: {id: node}
        "special",
        "stypes",
        "ind_desc",  # special nodes: {level: special child}
        "ind_asc",  # special nodes: {level: special parent}
        "adj",  # K_LEAF: shared per-vertex level->group table
    )

    def __init__(self, node_id: int, kind: int) -> None:
        self.id = node_id
        self.kind = kind
        self.parent = None
        self.left = None
        self.right = None
        self.level = -1
        self.size = 0
        self.rank = 0
        self.vertex = -1
        self.slot_tag = TAG_ROOT
        self.slot_ref = None
        self.tree = None
        self.owner = None
        self.tdepth = 0
        self.bot_root = False
        self.skey = None
        self.black = False
        self.btypes = 0
        self.ebits = 0
        self.bip = None
        self.bic = None
        self.special = False
        self.stypes = 0
        self.ind_desc = None
        self.ind_asc = None
        self.adj = None

    def children(self) -> tuple:
        left = self.left
        right = self.right
        if left is None:
            return () if right is None else (right,)
        if right is None:
            return (left,)
        return (left, right)

    def replace_child(self, old: "Node", new) -> None:
        if self.left is old:
            self.left = new
        elif self.right is old:
            self.right = new
        else:
            raise AssertionError("replace_child: not a child")

    def drop_child(self, old: "Node") -> None:
        if self.left is old:
            self.left = None
        elif self.right is old:
            self.right = None
        else:
            raise AssertionError("drop_child: not a child")

    def add_child(self, new: "Node") -> None:
        if self.left is None:
            self.left = new
        elif self.right is None:
            self.right = new
        else:
            raise AssertionError("add_child: node already has two children")
        new.parent = self

    def is_ranked(self) -> bool:
        """True if this node carries a rank in the local-tree sense."""
        kind = self.kind
        if kind == K_CNODE or kind == K_LEAF or kind == K_RANK or kind == K_RPATH:
            return True
        return self.bot_root

    def ranked_value(self) -> int:
        if self.bot_root:
            return self.rank  # bottom rank trumps the member's own rank
        kind = self.kind
        if kind == K_CNODE:
            return self.size.bit_length() - 1
        if kind == K_LEAF:
            return 0
        return self.rank

    def __repr__(self) -> str:  # pragma: no cover
        bits = [f"#{self.id}", KIND_NAMES.get(self.kind, "?")]
        if self.kind == K_CNODE:
            bits.append(f"lvl={self.level} n={self.size}")
        elif self.kind == K_LEAF:
            bits.append(f"v={self.vertex}")
        else:
            bits.append(f"rank={self.rank}")
        return "<" + " ".join(bits) + ">"


def crank(node: Node) -> int:
    """Rank of a cluster child: floor(log2 of its vertex count)."""
    if node.kind == K_LEAF:
        return 0
    return node.size.bit_length() - 1
