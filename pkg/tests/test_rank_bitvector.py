from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fmdummy._memory import is_aligned
from fmdummy.rank_bitvector import (LAYOUTS, AccessTrace, RankLayout, build_rank, locate,
                                    overhead_ratio)

ALL = list(LAYOUTS)


def prefix_counts(bits):
    return np.concatenate(([0], np.cumsum(np.asarray(bits, dtype=np.int64))))


def test_layout_geometry():
    assert LAYOUTS["512/64"].data_bits == 448
    assert LAYOUTS["512/32"].data_bits == 480
    assert LAYOUTS["256/64"].data_bits == 192
    assert LAYOUTS["256/32"].data_bits == 224
    assert LAYOUTS["256c"].data_bits == 192
    assert LAYOUTS["512c"].data_bits == 448
    with pytest.raises(ValueError):
        RankLayout(1024, 64)
    with pytest.raises(ValueError):
        RankLayout(256, 40, True)


@pytest.mark.parametrize("name, ratio", [
    ("512/64", Fraction(64, 448)), ("512/32", Fraction(32, 480)),
    ("256/64", Fraction(64, 192)), ("256/32", Fraction(32, 224)),
])
def test_overhead_ratio(name, ratio):
    assert overhead_ratio(LAYOUTS[name]) == ratio


def test_two_block_counter():
    rv = build_rank([1] * 448 + [0] * 448, LAYOUTS["512/64"])
    assert rv.nblocks == 2
    assert rv.block_counter(0) == 0 and rv.block_counter(1) == 448
    assert rv.rank1(896) == 448


def test_short_vector_single_block():
    bits = [1, 0, 1, 1, 0, 0, 0, 1, 1, 0]
    rv = build_rank(bits, LAYOUTS["512/64"])
    assert rv.nblocks == 1 and rv.block_counter(0) == 0
    assert [rv.rank1(j) for j in range(11)] == prefix_counts(bits).tolist()


def test_subcount_bytes():
    rv = build_rank([1] * 300, LAYOUTS["256c"])
    assert rv.subcounts(0) == (64, 128)
    assert rv.block_counter(1) == 192
    rv = build_rank([1] * 200 + [0] * 300, LAYOUTS["512c"])
    assert rv.subcounts(0) == (128, 72, 0)


def test_alternating():
    bits = [i % 2 for i in range(1000)]
    for name in ALL:
        assert build_rank(bits, LAYOUTS[name]).rank1(1000) == 500


@pytest.mark.parametrize("name", ALL)
def test_rank_exhaustive_two_blocks(name, rng):
    lay = LAYOUTS[name]
    for n in (0, 1, 63, 64, 65, lay.data_bits - 1, lay.data_bits, lay.data_bits + 1, 2 * lay.data_bits):
        bits = rng.integers(0, 2, n)
        rv = build_rank(bits, lay)
        expect = prefix_counts(bits)
        assert [rv.rank1(j) for j in range(n + 1)] == expect.tolist()
        assert rv.rank1_many(np.arange(n + 1)).tolist() == expect.tolist()


@given(st.lists(st.booleans(), max_size=1200), st.sampled_from(ALL))
@settings(max_examples=150, deadline=None)
def test_rank_matches_prefix_count(bits, name):
    rv = build_rank(bits, LAYOUTS[name])
    expect = prefix_counts(bits).tolist()
    assert [rv.rank1(j) for j in range(len(bits) + 1)] == expect


def test_rank_bounds():
    rv = build_rank([1, 1, 1], LAYOUTS["512/64"])
    with pytest.raises(IndexError):
        rv.rank1(4)
    with pytest.raises(IndexError):
        rv.rank1(-1)


@pytest.mark.parametrize("name", ALL)
def test_storage_invariants(name, rng):
    lay = LAYOUTS[name]
    bits = rng.integers(0, 2, 3 * lay.data_bits + 17)
    rv = build_rank(bits, lay)
    assert is_aligned(rv.words)
    # trailing data bits of the last block are zero
    last = rv.nblocks - 1
    used = len(bits) - last * lay.data_bits
    tail = [rv.bit(last * lay.data_bits + k) for k in range(used, lay.data_bits)]
    assert not any(tail)
    for i in range(rv.nblocks):
        assert rv.block_counter(i) == int(bits[: i * lay.data_bits].sum())
    for k in range(len(bits)):
        assert rv.bit(k) == bits[k]


@pytest.mark.parametrize("name, ceiling", [("256c", 1), ("512c", 2), ("512/64", 7), ("512/32", 8)])
def test_single_block_and_popcount_ceiling(name, ceiling, rng):
    lay = LAYOUTS[name]
    bits = rng.integers(0, 2, 5 * lay.data_bits)
    rv = build_rank(bits, lay)
    trace = AccessTrace()
    for j in range(len(bits) + 1):
        rv.rank1(j, trace)
    assert trace.calls == len(bits) + 1 and trace.ok
    assert trace.max_popcounts == ceiling
    assert trace.max_words <= lay.words_per_block
    vtrace = AccessTrace()
    rv.rank1_many(np.arange(len(bits) + 1), vtrace)
    assert vtrace.ok and vtrace.max_popcounts <= ceiling


def test_trace_flags_foreign_words():
    trace = AccessTrace()
    trace.record(1, [8, 9, 16], 2, 8)
    assert not trace.ok


def test_locate_matches_divmod():
    for lay in LAYOUTS.values():
        D = lay.data_bits
        nblocks = 50
        for j in range(nblocks * D + 1):
            blk, r = locate(j, D, nblocks)
            if j < nblocks * D:
                assert (blk, r) == divmod(j, D)
            else:
                assert (blk, r) == (nblocks - 1, D)
