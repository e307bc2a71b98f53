import numpy as np
import pytest

from fmdummy.dense_code import DenseCodeParams
from fmdummy.fm_dummy3 import build_dummy3, dna_sentinel_text
from fmdummy.fm_engine import build_dummy1, build_dummy2, count, count_many
from fmdummy.fm_hwt import build_hwt_index
from fmdummy.hash_boost import (EMPTY, KGramTable, boosted_count, boosted_count_many,
                                bucket_count_for, build_kgram_table, fnv1a, kgram_table_for)
from fmdummy.rank_bitvector import LAYOUTS
from fmdummy.suffix_bwt import build_suffix_array, naive_count, sentinel_text
from fmdummy.text_corpus import Text

from conftest import random_dna, random_text


def sa_interval(st, sa, gram):
    """Binary search over the explicit SA for rows whose suffix starts with ``gram``."""
    key = list(gram)
    suffixes = [list(st[i:i + len(key)]) for i in sa]
    lo = next((i for i, s in enumerate(suffixes) if s >= key), len(sa))
    hi = next((i for i, s in enumerate(suffixes) if s > key and s[: len(key)] != key), len(sa))
    return lo, hi


def test_fnv1a_reference():
    assert fnv1a(b"") == 0x811C9DC5
    assert fnv1a(b"a") == 0xE40C292C
    assert fnv1a(b"foobar") == 0xBF9CF968


def test_bucket_count():
    assert bucket_count_for(0, 0.9) == 1
    assert bucket_count_for(9, 0.9) == 16
    assert bucket_count_for(1024, 0.9) == 2048
    assert bucket_count_for(921, 0.9) == 1024
    assert bucket_count_for(922, 0.9) == 2048


def test_aaaa_k2():
    st = sentinel_text(b"aaaa")
    tbl = build_kgram_table(st, build_suffix_array(st), 2)
    items = list(tbl.items())
    assert len(items) == 1
    gram, sp, ep = items[0]
    assert gram == (ord("a") + 1,) * 2 and ep - sp == 3


def test_k_equals_n():
    st = sentinel_text(b"abcab")
    tbl = build_kgram_table(st, build_suffix_array(st), 5)
    assert [(ep - sp) for _, sp, ep in tbl.items()] == [1]


def test_dna_gram_bound_and_intervals(rng):
    data = random_dna(rng, 3000)
    st = sentinel_text(data)
    sa = build_suffix_array(st)
    tbl = build_kgram_table(st, sa, 5)
    assert tbl.entries <= 4 ** 5
    assert tbl.entries == len({data[i:i + 5] for i in range(len(data) - 4)})
    assert tbl.occupancy <= 0.9
    for gram, sp, ep in list(tbl.items())[:80]:
        assert (sp, ep) == sa_interval(st.tolist(), sa.tolist(), gram)
        assert tbl.lookup(gram) == (sp, ep)
    assert tbl.lookup([ord("Z") + 1] * 5) is None


def test_collisions_probe():
    st = sentinel_text(b"abcdefghij")
    tbl = build_kgram_table(st, build_suffix_array(st), 2, load_factor=0.9)
    mask = tbl.buckets - 1
    grams = [tuple(g) for g, _, _ in tbl.items()]
    by_bucket = {}
    for g in grams:
        by_bucket.setdefault(fnv1a(bytes(x - 1 for x in g)) & mask, []).append(g)
    collided = [v for v in by_bucket.values() if len(v) > 1]
    assert collided, "fixture should contain a hash collision"
    for pair in collided:
        for g in pair:
            assert tbl.lookup(g) is not None
    # an absent gram sharing a bucket with a stored one still misses
    for a in range(256):
        for b in range(256):
            key = bytes([a, b])
            g = (a + 1, b + 1)
            if fnv1a(key) & mask in by_bucket and g not in grams:
                assert tbl.lookup(g) is None
                return


def test_table_validation():
    st = sentinel_text(b"abc")
    with pytest.raises(ValueError):
        build_kgram_table(st, build_suffix_array(st), 4)
    with pytest.raises(ValueError):
        build_kgram_table(st, build_suffix_array(st), 2, load_factor=1.0)
    tbl = build_kgram_table(st, build_suffix_array(st), 2)
    with pytest.raises(ValueError):
        tbl.lookup([1])


def make_indexes(t):
    return [build_dummy1(t, LAYOUTS["512c"]), build_dummy3(t, 512), build_hwt_index(t, 4, 512)]


def test_boosted_equals_plain(rng):
    data = random_dna(rng, 20_000)
    t = Text(data)
    pats = [data[i:i + m] for i, m in zip(rng.integers(0, 19_990, 600), rng.integers(6, 11, 600))]
    pats += [b"ACGTACGTACGTACGTAA", b"AAAAA", b"CCCC"]
    truth = [naive_count(data, p) for p in pats]
    for idx in make_indexes(t):
        tbl = kgram_table_for(idx, t)
        assert boosted_count_many(idx, tbl, pats).tolist() == truth
        assert [boosted_count(idx, tbl, p).occurrences for p in pats] == truth


def test_m_equal_k_and_fallback(rng):
    data = random_dna(rng, 5000)
    t = Text(data)
    idx = build_dummy1(t, LAYOUTS["512/64"])
    tbl = kgram_table_for(idx, t)
    g = data[100:105]
    res = boosted_count(idx, tbl, g)
    assert (res.sp, res.ep) == tbl.lookup(idx.translate(g))
    assert boosted_count(idx, tbl, data[7:11]) == count(idx, data[7:11])


def test_dummy3_table_only_acgt(rng):
    data = random_dna(rng, 4000, b"ACGTN")
    t = Text(data)
    idx = build_dummy3(t, 1024)
    tbl = kgram_table_for(idx, t)
    assert all(max(g) <= 4 for g, _, _ in tbl.items())
    st = dna_sentinel_text(t)
    grams = {tuple(st[i:i + 5]) for i in range(len(data) - 4)}
    assert tbl.entries == sum(1 for g in grams if max(g) <= 4)


def test_dummy2_not_boosted(rng):
    t = Text(random_text(rng, 300, 10))
    idx = build_dummy2(t, DenseCodeParams.cb(8), LAYOUTS["512/64"])
    with pytest.raises(ValueError):
        kgram_table_for(idx, t)


def test_empty_bucket_flag():
    st = sentinel_text(b"abab")
    tbl = build_kgram_table(st, build_suffix_array(st), 2)
    free = tbl.sp == EMPTY
    assert (tbl.ep[free] == EMPTY).all()
    assert isinstance(tbl, KGramTable) and tbl.entries == 2
