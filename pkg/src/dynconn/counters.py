"""Operation counters shared by every layer of one engine instance."""

from __future__ import annotations

COUNTER_NAMES = (
    "anc_calls",
    "anc_touched",
    "anc_touched_max",
    "arrivals",
    "bbst_nodes_created",
    "bbst_nodes_deleted",
    "bitmap_recomputes",
    "bottom_conversions",
    "bottom_leaf_removals",
    "bottom_root_repairs",
    "buffer_moves",
    "cluster_merges",
    "cnodes_created",
    "cnodes_deleted",
    "collisions",
    "departures",
    "dissolves",
    "iterator_yields",
    "nodes_touched",
    "promotions",
    "rank_nodes_created",
    "rank_nodes_deleted",
    "recolor_nodes",
    "search_units",
    "searches",
    "shortcuts_created",
    "shortcuts_deleted",
    "splits",
    "table_recomputes",
    "validations",
)


class Counters:
    __slots__ = COUNTER_NAMES

    def __init__(self) -> None:
        for name in COUNTER_NAMES:
            setattr(self, name, 0)

    def bump(self, name: str, amount: int = 1) -> None:
        setattr(self, name, getattr(self, name) + amount)

    def snapshot(self) -> dict[str, int]:
        """Return a name -> value dict in the canonical column order."""
        return {name: getattr(self, name) for name in COUNTER_NAMES}

    def note_anc_walk(self, touched: int) -> None:
        self.anc_calls += 1
        self.anc_touched += touched
        if touched > self.anc_touched_max:
            self.anc_touched_max = touched
