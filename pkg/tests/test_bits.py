from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynconn.bits import BitSplitter, highest_set, iter_set_bits, lowest_set, pow2_round


def naive_bits(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def test_iter_set_bits_examples():
    assert list(iter_set_bits(0)) == []
    assert list(iter_set_bits(0b1010)) == [1, 3]
    assert list(iter_set_bits(1 << 63)) == [63]


@given(st.integers(min_value=0, max_value=(1 << 64) - 1))
def test_iter_set_bits_matches_naive(mask):
    assert list(iter_set_bits(mask)) == naive_bits(mask)


@given(st.integers(min_value=1, max_value=(1 << 64) - 1))
def test_extremes(mask):
    bits = naive_bits(mask)
    assert lowest_set(mask) == bits[0]
    assert highest_set(mask) == bits[-1]


def test_pow2_round():
    assert pow2_round(0.3) == 1
    assert pow2_round(1.0) == 1
    assert pow2_round(3.0) == 4  # log2(3) = 1.58 rounds to 2
    assert pow2_round(1000.0) == 1024
    assert pow2_round(1024.0) == 1024


@given(st.integers(min_value=0, max_value=(1 << 40) - 1))
def test_splitter_matches_naive(mask):
    sp = BitSplitter(40)
    assert sp.bits(mask) == naive_bits(mask)


def test_splitter_clips_to_width():
    sp = BitSplitter(8)
    assert sp.bits((1 << 20) | 0b101) == [0, 2]


@pytest.mark.parametrize("width", [1, 2, 3, 7, 64])
def test_splitter_widths(width):
    sp = BitSplitter(width)
    full = (1 << width) - 1
    assert sp.bits(full) == list(range(width))
    assert sp.bits(0) == []
