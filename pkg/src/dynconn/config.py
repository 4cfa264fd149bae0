"""Engine configuration and the per-instance derived parameters.

All size-dependent quantities are derived once from the fixed vertex count,
so every component agrees on spacings, shift amounts, and capacity limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bits import pow2_round

# Calibrated multipliers for structural depth and walk-length assertions.
# The base values were frozen from measurements at n = 2**10 and are
# re-checked (with slack) at larger sizes by the acceptance suite.
C_DEPTH_SIMPLE = 3  # simple local-tree depth <= C_DEPTH_SIMPLE * ceil(log2 n)
C_DEPTH_LAZY = 4  # lazy-tree depth <= C_DEPTH_LAZY * ceil(log2 n) + C_DEPTH_LAZY0
C_DEPTH_LAZY0 = 24
C_LL = 9.0  # per-child depth slack multiplier on loglog(n)
C_0 = 8.0  # per-child depth additive slack
C_B = 8.0  # black-induced children limit multiplier
C_D = 4.0  # shortcut path-length multiplier on loglog(n)**4
C_D2 = 16.0  # shortcut path-length additive slack
C_S = 8.0  # ancestor-walk touched-node multiplier on log(n)/loglog(n)
C_S2 = 16.0  # ancestor-walk additive slack
C_I = 8.0  # iterator per-yield overhead multiplier


@dataclass(frozen=True)
class EngineConfig:
    """User-tunable knobs; structural defaults match the analysed setting."""

    epsilon: float = 0.5
    alpha: float = 3.0
    validator_mode: str = "off"  # "off" | "every"
    paranoid_shortcuts: bool = False


@dataclass(frozen=True)
class Params:
    """Derived, immutable per-instance parameters."""

    n: int
    epsilon: float
    alpha: float
    lmax: int  # maximum edge level, floor(log2 n)
    log2n: float
    ll: float  # log2(log2 n), clamped at 0
    h: int  # heavy threshold shift: round(epsilon * ll)
    s: int  # black spacing, >= 1
    big_s: int  # special spacing, >= 1
    buffer_cap: int  # buffer converts to a bottom tree above this leaf count
    k_bic: int  # allowed black-induced children per node


def derive_params(n: int, cfg: EngineConfig) -> Params:
    if n < 1:
        raise ValueError("vertex count must be positive")
    lmax = max(0, n.bit_length() - 1)
    log2n = max(1.0, math.log2(n))
    ll = max(0.0, math.log2(log2n))
    h = max(0, round(cfg.epsilon * ll))
    s = max(1, math.floor(cfg.epsilon * ll))
    big_s = max(1, math.floor(ll) * s)
    buffer_cap = pow2_round(log2n**cfg.alpha)
    k_bic = max(4, math.ceil(C_B * log2n ** (3.0 * cfg.epsilon)))
    return Params(
        n=n,
        epsilon=cfg.epsilon,
        alpha=cfg.alpha,
        lmax=lmax,
        log2n=log2n,
        ll=ll,
        h=h,
        s=s,
        big_s=big_s,
        buffer_cap=buffer_cap,
        k_bic=k_bic,
    )


def simple_depth_limit(params: Params) -> int:
    return C_DEPTH_SIMPLE * math.ceil(params.log2n) + 2


def lazy_depth_limit(params: Params) -> int:
    return C_DEPTH_LAZY * math.ceil(params.log2n) + C_DEPTH_LAZY0


def child_depth_limit(params: Params, parent_size: int, child_size: int) -> float:
    """Per-child depth ceiling inside one local tree."""
    gap = math.log2(max(1.0, parent_size / child_size))
    return gap + C_LL * max(1.0, params.ll) + C_0


def shortcut_path_limit(params: Params) -> float:
    return C_D * max(1.0, params.ll) ** 4 + C_D2


def ancestor_walk_limit(params: Params) -> float:
    return C_S * (params.log2n / max(1.0, params.ll)) + C_S2
