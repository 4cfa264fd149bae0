"""Exception types raised by the connectivity engine and its components."""

from __future__ import annotations


class DynConnError(Exception):
    """Base class for all errors raised by this package."""


class SelfLoop(DynConnError):
    """An edge was inserted with both endpoints equal."""


class DuplicateEdge(DynConnError):
    """An edge between the given endpoints already exists."""


class VertexOutOfRange(DynConnError):
    """A vertex id is outside 0..n-1."""


class NoSuchEdge(DynConnError):
    """No edge exists between the given endpoints."""


class LevelOverflow(DynConnError):
    """An edge level was pushed past the maximum.

    Reaching this from the public engine API means a cluster-size invariant
    was violated upstream; the engine itself never promotes past the top.
    """


class LevelMismatch(DynConnError):
    """Two cluster nodes were merged across different levels."""


class NotAChild(DynConnError):
    """A detach was requested for a node that is not a child of the parent."""


class InvariantViolation(DynConnError):
    """A structural invariant would be broken by the requested operation."""


class NoSuchAncestor(DynConnError):
    """No ancestor exists at the requested level."""


class NoSpecialParent(DynConnError):
    """The node has no special ancestor (it is a root)."""


class WorkloadError(DynConnError):
    """A workload file could not be parsed or replayed."""

    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message if line_no is None else f"line {line_no}: {message}")
        self.line_no = line_no
