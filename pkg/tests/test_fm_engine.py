import warnings

import numpy as np
import pytest

from fmdummy.dense_code import DenseCodeParams
from fmdummy.fm_engine import (CountResult, build_dummy1, build_dummy2, count, count_many)
from fmdummy.rank_bitvector import LAYOUTS
from fmdummy.suffix_bwt import bwt_from_text, naive_count, naive_occ, sentinel_text
from fmdummy.text_corpus import Text

from conftest import random_text


def sample_patterns(rng, data, k=200, max_m=8):
    out = []
    for _ in range(k):
        m = int(rng.integers(1, max_m + 1))
        i = int(rng.integers(0, len(data) - m + 1))
        out.append(data[i:i + m])
    out.append(data[-3:])
    out.append(data[:4])
    return out


def test_abracadabra_counts():
    idx = build_dummy1(Text(b"abracadabra"), LAYOUTS["512/64"])
    assert count(idx, b"abra").occurrences == 2
    assert count(idx, b"a").occurrences == 5
    assert count(idx, b"xyz") == CountResult(0, 0)
    assert count(idx, b"abrab").occurrences == 0


def test_overlapping():
    idx = build_dummy1(Text(b"aaaa"), LAYOUTS["256c"])
    assert count(idx, b"aa").occurrences == 3
    assert count_many(idx, [b"aa", b"aaaa", b"aaaaa"]).tolist() == [3, 1, 0]


def test_empty_pattern_rejected():
    idx = build_dummy1(Text(b"abc"), LAYOUTS["512/64"])
    with pytest.raises(ValueError):
        count(idx, b"")
    with pytest.raises(ValueError):
        count_many(idx, [b"a", b""])


def test_dummy1_structure():
    t = Text(b"abc")
    idx = build_dummy1(t, LAYOUTS["512/64"])
    assert len(idx.vectors) == 3
    bwt = bwt_from_text(sentinel_text(b"abc")).bwt
    for sym, vec in zip(idx.symbols, idx.vectors):
        assert len(vec) == 4
        assert vec.rank1(4) == 1
        assert [vec.bit(i) for i in range(4)] == [int(b == sym) for b in bwt]
    sentinel_row = int(np.flatnonzero(bwt == 0)[0])
    assert all(v.bit(sentinel_row) == 0 for v in idx.vectors)


def test_early_exit_counts_no_further_ranks():
    from fmdummy.rank_bitvector import AccessTrace
    idx = build_dummy1(Text(b"abcabcabc"), LAYOUTS["512/64"])
    trace = AccessTrace()
    assert count(idx, b"aaaaaaaaaac", trace=trace).occurrences == 0
    # "c" then "a" gives an empty range after the second step; the loop stops there
    assert trace.calls == 4


@pytest.mark.parametrize("layout", list(LAYOUTS))
def test_dummy1_occ_matches_oracle(layout, rng):
    data = random_text(rng, 3000, 12)
    t = Text(data)
    idx = build_dummy1(t, LAYOUTS[layout])
    bwt = bwt_from_text(sentinel_text(data)).bwt.tolist()
    pos = rng.integers(0, idx.bwt_length + 1, 300)
    for sym in idx.symbols:
        expect = [naive_occ(bwt, sym, int(p)) for p in pos]
        assert [idx.occ(sym, int(p)) for p in pos] == expect
        assert idx.occ_many(np.full(len(pos), sym), pos).tolist() == expect
        assert idx.occ(sym, idx.bwt_length) == data.count(bytes([sym - 1]))
    # Σ_c occ(c, n+1) + 1 = n + 1
    assert sum(idx.occ(s, idx.bwt_length) for s in idx.symbols) + 1 == idx.bwt_length


@pytest.mark.parametrize("layout", list(LAYOUTS))
def test_dummy1_counts(layout, rng):
    data = random_text(rng, 4000, 6)
    idx = build_dummy1(Text(data), LAYOUTS[layout])
    pats = sample_patterns(rng, data) + [b"\x00\x01"]
    expect = [naive_count(data, p) for p in pats]
    assert count_many(idx, pats).tolist() == expect
    assert [count(idx, p).occurrences for p in pats] == expect


def test_dummy1_warns_for_large_alphabet(rng):
    with pytest.warns(UserWarning):
        build_dummy1(Text(random_text(rng, 200, 40)), LAYOUTS["512/64"])


@pytest.mark.parametrize("params", [
    DenseCodeParams.scbdc(4, 2, 4, 6),
    DenseCodeParams.scbdc(2, 6, 2, 6),
    DenseCodeParams.cb(8, 4),
    DenseCodeParams.cb(12, 4),
    DenseCodeParams.cb(4, 3),
])
def test_dummy2_counts(params, rng):
    data = random_text(rng, 5000, 64)
    idx = build_dummy2(Text(data), params, LAYOUTS["512c"])
    pats = sample_patterns(rng, data) + [data[-1:], data[-6:], b"\xff\xfe"]
    expect = [naive_count(data, p) for p in pats]
    assert count_many(idx, pats).tolist() == expect
    assert [count(idx, p).occurrences for p in pats] == expect


def test_dummy2_inner_alphabet_is_digit_space(rng):
    data = random_text(rng, 500, 30)
    idx = build_dummy2(Text(data), DenseCodeParams.cb(4, 3), LAYOUTS["256/32"])
    assert idx.inner.symbols == tuple(range(1, 9))
    assert idx.variant == "dummy2cb"
    assert idx.translate(b"\x00") is None


def test_cb_initial_range_is_load_bearing():
    # with one beginner, "x" -> (0,) and "y" -> (0, 1): x's codeword prefixes y's
    idx = build_dummy2(Text(b"xy"), DenseCodeParams.cb(1, 4), LAYOUTS["512/64"])
    assert idx.code.encode_map[ord("x")] == (0,)
    assert idx.code.encode_map[ord("y")] == (0, 1)
    assert count(idx, b"x").occurrences == naive_count(b"xy", b"x") == 1
    assert count(idx, b"x", start=idx.full_range()).occurrences == 2


def test_sigma_over_16_permitted_with_warning(rng):
    data = random_text(rng, 1000, 20)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        idx = build_dummy1(Text(data), LAYOUTS["256/64"])
    assert count(idx, data[10:15]).occurrences == naive_count(data, data[10:15])
