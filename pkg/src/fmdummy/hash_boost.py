"""k-gram hash table that replaces the first k steps of backward search.

Every k-gram of the text maps to the half-open range of BWT rows whose
suffixes start with it.  Buckets use open addressing with linear probing
and FNV-1a (32-bit) over the k key bytes; the bucket count is the smallest
power of two keeping the load at or under the target.  Keys are stored in
full because a lookup for an absent gram must be able to fail.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .fm_dummy3 import FmDummy3Index, dna_sentinel_text
from .fm_engine import (CountResult, FMIndex, FmDummy1Index, _symbol_matrix, backward_search,
                        count, search_many)
from .fm_hwt import FmHwtIndex
from .suffix_bwt import build_suffix_array, sentinel_text
from .text_corpus import Text

EMPTY = np.iinfo(np.uint64).max
FNV_OFFSET = 0x811C9DC5
FNV_PRIME = 0x01000193


def fnv1a(key: bytes) -> int:
    h = FNV_OFFSET
    for byte in key:
        h = ((h ^ byte) * FNV_PRIME) & 0xFFFFFFFF
    return h


def bucket_count_for(entries: int, load_factor: float) -> int:
    buckets = 1
    while entries > load_factor * buckets:
        buckets *= 2
    return buckets


@dataclass
class KGramTable:
    k: int
    keys: np.ndarray   # (buckets, k) uint8, symbol code - 1
    sp: np.ndarray     # uint64, EMPTY marks a free bucket
    ep: np.ndarray
    load_factor: float = 0.9

    @property
    def buckets(self) -> int:
        return len(self.sp)

    @property
    def entries(self) -> int:
        return int((self.sp != EMPTY).sum())

    @property
    def occupancy(self) -> float:
        return self.entries / self.buckets

    @property
    def nbytes(self) -> int:
        return self.keys.nbytes + self.sp.nbytes + self.ep.nbytes

    def _probe(self, key: bytes):
        mask = self.buckets - 1
        slot = fnv1a(key) & mask
        for _ in range(self.buckets):
            yield slot
            slot = (slot + 1) & mask

    def lookup(self, gram: Sequence[int]) -> Optional[Tuple[int, int]]:
        """Row range for a gram given as index symbol codes."""
        if len(gram) != self.k:
            raise ValueError(f"gram length must be {self.k}")
        if min(gram) < 1 or max(gram) > 256:
            return None
        key = bytes(int(g) - 1 for g in gram)
        for slot in self._probe(key):
            if self.sp[slot] == EMPTY:
                return None
            if self.keys[slot].tobytes() == key:
                return int(self.sp[slot]), int(self.ep[slot])
        return None

    def items(self):
        for slot in np.flatnonzero(self.sp != EMPTY):
            yield tuple(int(x) + 1 for x in self.keys[slot]), int(self.sp[slot]), int(self.ep[slot])


def gram_runs(st: np.ndarray, sa: np.ndarray, k: int):
    """(gram codes, sp, ep) for every maximal SA run sharing a k-symbol prefix."""
    n = len(st) - 1
    rows = np.flatnonzero(sa + k <= n)
    if rows.size == 0:
        return []
    starts = sa[rows]
    grams = np.stack([st[starts + t] for t in range(k)], axis=1)
    new = np.ones(len(rows), dtype=bool)
    new[1:] = (grams[1:] != grams[:-1]).any(axis=1)
    heads = np.flatnonzero(new)
    tails = np.append(heads[1:], len(rows)) - 1
    return [(tuple(int(x) for x in grams[h]), int(rows[h]), int(rows[t]) + 1)
            for h, t in zip(heads, tails)]


def build_kgram_table(st: np.ndarray, sa: np.ndarray, k: int = 5, load_factor: float = 0.9,
                      alphabet: Sequence[int] | None = None) -> KGramTable:
    """Table over the sentinel text ``st``; ``alphabet`` restricts which grams are kept."""
    n = len(st) - 1
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}")
    if not 0 < load_factor < 1:
        raise ValueError("load factor must lie strictly between 0 and 1")
    runs = gram_runs(np.asarray(st), np.asarray(sa), k)
    if alphabet is not None:
        allowed = set(alphabet)
        runs = [r for r in runs if allowed.issuperset(r[0])]
    buckets = bucket_count_for(len(runs), load_factor)
    keys = np.zeros((buckets, k), dtype=np.uint8)
    sp = np.full(buckets, EMPTY, dtype=np.uint64)
    ep = np.full(buckets, EMPTY, dtype=np.uint64)
    table = KGramTable(k, keys, sp, ep, load_factor)
    for gram, lo, hi in runs:
        key = bytes(g - 1 for g in gram)
        for slot in table._probe(key):
            if sp[slot] == EMPTY:
                keys[slot] = np.frombuffer(key, dtype=np.uint8)
                sp[slot] = lo
                ep[slot] = hi
                break
    return table


def kgram_table_for(idx: FMIndex, t: Text, k: int = 5, load_factor: float = 0.9) -> KGramTable:
    """Build the table in ``idx``'s own row space."""
    if isinstance(idx, FmDummy3Index):
        st = dna_sentinel_text(t)
        return build_kgram_table(st, build_suffix_array(st), k, load_factor, alphabet=(1, 2, 3, 4))
    if isinstance(idx, (FmDummy1Index, FmHwtIndex)):
        st = sentinel_text(t.data)
        return build_kgram_table(st, build_suffix_array(st), k, load_factor)
    raise ValueError(f"hash boosting is not available for {idx.variant}")


def boosted_count(idx: FMIndex, tbl: KGramTable, pattern: bytes) -> CountResult:
    if len(pattern) < tbl.k:
        return count(idx, pattern)
    syms = idx.translate(pattern)
    if syms is None:
        return CountResult(0, 0)
    hit = tbl.lookup(syms[-tbl.k:])
    if hit is None:
        return CountResult(0, 0)
    return backward_search(idx, syms[: len(syms) - tbl.k], *hit)


def boosted_count_many(idx: FMIndex, tbl: KGramTable, patterns: Sequence[bytes]) -> np.ndarray:
    if not patterns:
        return np.zeros(0, dtype=np.int64)
    if any(len(p) == 0 for p in patterns):
        raise ValueError("patterns must be non-empty")
    mat, lens, missing = _symbol_matrix(idx, patterns)
    sp0, ep0 = idx.initial_range()
    sp = np.full(len(patterns), sp0, dtype=np.int64)
    ep = np.where(missing, sp0, ep0).astype(np.int64)
    k = tbl.k
    for i in np.flatnonzero((lens >= k) & ~missing):
        hit = tbl.lookup(mat[i, lens[i] - k: lens[i]])
        if hit is None:
            sp[i] = ep[i] = 0
        else:
            sp[i], ep[i] = hit
    rest = np.where(lens >= k, lens - k, lens)
    sp, ep = search_many(idx, mat, rest, sp, ep)
    return ep - sp
