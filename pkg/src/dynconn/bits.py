"""Small integer-bitmap helpers used by the bitmap and shortcut layers."""

from __future__ import annotations

from collections.abc import Iterator


def iter_set_bits(mask: int) -> Iterator[int]:
    """Yield the positions of set bits in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bit_count(mask: int) -> int:
    return mask.bit_count()


def lowest_set(mask: int) -> int:
    # precondition: mask != 0
    return (mask & -mask).bit_length() - 1


def highest_set(mask: int) -> int:
    # precondition: mask != 0
    return mask.bit_length() - 1


def pow2_round(x: float) -> int:
    """Round a positive quantity to the nearest power of two (ties to even exponent)."""
    import math

    if x <= 1.0:
        return 1
    ex = round(math.log2(x))
    return 1 << max(0, ex)


class BitSplitter:
    """Extract set-bit positions by binary splitting with precomputed range masks.

    For a fixed width, every range [lo, hi) that the recursion can visit gets
    its low-half and high-half masks built once up front, so extracting the
    bits of a mask costs one mask-and per visited range instead of a shift
    per bit.
    """

    __slots__ = ("width", "_halves")

    def __init__(self, width: int) -> None:
        self.width = width
        self._halves: dict[tuple[int, int], tuple[int, int, int]] = {}
        stack = [(0, width)]
        while stack:
            lo, hi = stack.pop()
            if hi - lo <= 1:
                continue
            mid = (lo + hi) // 2
            low_mask = ((1 << (mid - lo)) - 1) << lo
            high_mask = ((1 << (hi - mid)) - 1) << mid
            self._halves[(lo, hi)] = (mid, low_mask, high_mask)
            stack.append((lo, mid))
            stack.append((mid, hi))

    def bits(self, mask: int) -> list[int]:
        """Set-bit positions below ``width``, ascending."""
        out: list[int] = []
        if not mask:
            return out
        # explicit stack, high range pushed first so low bits pop first
        stack = [(0, self.width, mask & ((1 << self.width) - 1))]
        while stack:
            lo, hi, m = stack.pop()
            if not m:
                continue
            if hi - lo == 1:
                out.append(lo)
                continue
            mid, low_mask, high_mask = self._halves[(lo, hi)]
            stack.append((mid, hi, m & high_mask))
            stack.append((lo, mid, m & low_mask))
        return out
