"""Fully dynamic graph connectivity with polylogarithmic updates."""

from .config import EngineConfig
from .errors import (
    DuplicateEdge,
    DynConnError,
    LevelOverflow,
    NoSuchEdge,
    SelfLoop,
    VertexOutOfRange,
    WorkloadError,
)
from .search_engine import ConnectivityEngine

__all__ = [
    "ConnectivityEngine",
    "EngineConfig",
    "DynConnError",
    "DuplicateEdge",
    "LevelOverflow",
    "NoSuchEdge",
    "SelfLoop",
    "VertexOutOfRange",
    "WorkloadError",
]

__version__ = "1.0.0"
