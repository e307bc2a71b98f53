"""Suffix arrays, the BWT, C arrays and the naive oracles used in tests.

Symbols are small non-negative integers.  Value 0 is reserved for the
sentinel, so byte ``b`` of a text is stored as ``b + 1``.  The C array uses
the strictly-smaller convention over the sentinel-extended text, which turns
the backward-search step into ``sp = C[c] + occ(c, sp)`` over half-open
ranges.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SENTINEL = 0


@dataclass(frozen=True)
class BwtResult:
    bwt: np.ndarray          # n + 1 symbols, sentinel included
    c_array: np.ndarray      # c_array[v] = #symbols < v; one extra slot past the largest symbol
    primary_row: int         # row whose BWT cell holds the sentinel (sa[row] == 0)

    def __len__(self):
        return len(self.bwt)


def sentinel_text(data, shift: int = 1) -> np.ndarray:
    """Append the sentinel to ``data`` (bytes or integer symbols shifted by ``shift``)."""
    if isinstance(data, (bytes, bytearray, memoryview)):
        codes = np.frombuffer(bytes(data), dtype=np.uint8).astype(np.int32)
    else:
        codes = np.asarray(data, dtype=np.int32)
    if codes.size and codes.min() + shift <= SENTINEL:
        raise ValueError("symbols collide with the sentinel")
    st = np.empty(len(codes) + 1, dtype=np.int32)
    st[:-1] = codes + shift
    st[-1] = SENTINEL
    return st


def build_suffix_array(st: np.ndarray) -> np.ndarray:
    """Prefix doubling on integer ranks; O(n log^2 n) worst case, numpy-bound."""
    s = np.asarray(st)
    n = len(s)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    _, rank = np.unique(s, return_inverse=True)
    rank = rank.astype(np.int64).ravel()
    sa = np.argsort(rank, kind="stable")
    k = 1
    while True:
        if int(rank.max()) == n - 1:
            return sa.astype(np.int64)
        second = np.zeros(n, dtype=np.int64)
        second[: n - k] = rank[k:] + 1
        key = rank * (n + 1) + second
        sa = np.argsort(key)
        sk = key[sa]
        new_rank = np.empty(n, dtype=np.int64)
        new_rank[sa] = np.concatenate(([0], np.cumsum(sk[1:] != sk[:-1])))
        rank = new_rank
        k *= 2
        if k >= n and int(rank.max()) != n - 1:
            raise ValueError("text is not sentinel-terminated")


def c_array_of(symbols: np.ndarray, domain: int | None = None) -> np.ndarray:
    """c[v] = number of entries strictly smaller than v, for v in 0..domain."""
    symbols = np.asarray(symbols)
    if domain is None:
        domain = int(symbols.max()) + 1
    counts = np.bincount(symbols, minlength=domain)
    return np.concatenate(([0], np.cumsum(counts, dtype=np.int64)))


def build_bwt(st: np.ndarray, sa: np.ndarray) -> BwtResult:
    st = np.asarray(st)
    sa = np.asarray(sa)
    bwt = st[sa - 1]  # sa == 0 wraps to the sentinel at index -1
    primary = int(np.flatnonzero(sa == 0)[0])
    return BwtResult(bwt.astype(np.int32), c_array_of(st), primary)


def bwt_from_text(st: np.ndarray) -> BwtResult:
    return build_bwt(st, build_suffix_array(st))


def invert_bwt(res: BwtResult) -> np.ndarray:
    """Rebuild the sentinel-terminated text by LF mapping."""
    bwt = res.bwt
    n = len(bwt)
    # occurrence rank of each cell among equal symbols
    order = np.argsort(bwt, kind="stable")
    lf = np.empty(n, dtype=np.int64)
    lf[order] = np.arange(n)
    out = np.empty(n, dtype=bwt.dtype)
    out[-1] = SENTINEL
    row = res.primary_row  # suffix 0; one LF step lands on the sentinel suffix
    for i in range(n - 2, -1, -1):
        row = lf[row]
        out[i] = bwt[row]
    return out


def naive_occ(bwt, c, pos: int) -> int:
    if pos < 0 or pos > len(bwt):
        raise IndexError(f"pos {pos} outside 0..{len(bwt)}")
    return sum(1 for x in bwt[:pos] if x == c)


def naive_count(text: bytes, pattern: bytes) -> int:
    """Overlapping occurrences of ``pattern`` in ``text`` by direct scanning."""
    if not pattern or len(pattern) > len(text):
        return 0
    count = 0
    i = text.find(pattern)
    while i != -1:
        count += 1
        i = text.find(pattern, i + 1)
    return count
