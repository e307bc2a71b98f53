"""Backward-search counting and the per-symbol bit-vector indexes.

Ranges are half-open ``[sp, ep)`` over BWT rows.  One step of the search for
symbol ``c`` is ``sp = C[c] + occ(c, sp)``, ``ep = C[c] + occ(c, ep)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._memory import aligned_zeros
from .dense_code import CB, DenseCode, DenseCodeError, DenseCodeParams, derive_code
from .rank_bitvector import (AccessTrace, InterleavedRankVector, RankLayout, locate,
                             pack_blocks, rank_words)
from .suffix_bwt import BwtResult, bwt_from_text, sentinel_text
from .text_corpus import Text

DUMMY1_SIGMA_LIMIT = 16


@dataclass(frozen=True)
class CountResult:
    sp: int
    ep: int

    @property
    def occurrences(self) -> int:
        return self.ep - self.sp

    def __bool__(self):
        return self.ep > self.sp


class FMIndex:
    """Common surface of every index variant: a C array plus occ()."""

    variant = "abstract"
    prefetch = False  # accepted for parity with native builds; has no effect here

    c_array: np.ndarray
    bwt_length: int
    n: int

    def occ(self, c: int, pos: int, trace: AccessTrace | None = None) -> int:
        raise NotImplementedError

    def occ_many(self, cs: np.ndarray, pos: np.ndarray, trace: AccessTrace | None = None) -> np.ndarray:
        return np.array([self.occ(int(c), int(p), trace) for c, p in zip(cs, pos)], dtype=np.int64)

    def translate(self, pattern: bytes) -> Optional[np.ndarray]:
        """Pattern as index symbols, or None when it cannot occur."""
        raise NotImplementedError

    def initial_range(self) -> Tuple[int, int]:
        return 0, self.bwt_length

    @property
    def nbytes(self) -> int:
        raise NotImplementedError


def backward_search(idx: FMIndex, syms: Sequence[int], sp: int, ep: int,
                    trace: AccessTrace | None = None) -> CountResult:
    C = idx.c_array
    for c in reversed(syms):
        if sp >= ep:
            break
        c = int(c)
        base = int(C[c])
        sp = base + idx.occ(c, sp, trace)
        ep = base + idx.occ(c, ep, trace)
    if ep <= sp:
        return CountResult(sp, sp)
    return CountResult(sp, ep)


def count(idx: FMIndex, pattern: bytes, start: Tuple[int, int] | None = None,
          trace: AccessTrace | None = None) -> CountResult:
    if len(pattern) == 0:
        raise ValueError("pattern must be non-empty")
    syms = idx.translate(pattern)
    if syms is None:
        return CountResult(0, 0)
    sp, ep = idx.initial_range() if start is None else start
    return backward_search(idx, syms, sp, ep, trace)


def _symbol_matrix(idx: FMIndex, patterns: Sequence[bytes]):
    translated = [idx.translate(p) for p in patterns]
    lens = np.array([0 if t is None else len(t) for t in translated], dtype=np.int64)
    width = int(lens.max()) if len(lens) else 0
    mat = np.zeros((len(patterns), max(width, 1)), dtype=np.int64)
    for i, t in enumerate(translated):
        if t is not None:
            mat[i, : len(t)] = t
    missing = np.array([t is None for t in translated], dtype=bool)
    return mat, lens, missing


def search_many(idx: FMIndex, mat: np.ndarray, lens: np.ndarray, sp: np.ndarray, ep: np.ndarray,
                trace: AccessTrace | None = None):
    """Lock-step backward search; row ``i`` consumes ``mat[i, :lens[i]]`` right to left."""
    C = idx.c_array
    sp = sp.astype(np.int64).copy()
    ep = ep.astype(np.int64).copy()
    width = mat.shape[1] if len(lens) else 0
    for t in range(width):
        live = np.flatnonzero((lens > t) & (sp < ep))
        if live.size == 0:
            break
        c = mat[live, lens[live] - 1 - t]
        k = live.size
        occ = idx.occ_many(np.concatenate([c, c]), np.concatenate([sp[live], ep[live]]), trace)
        base = C[c]
        sp[live] = base + occ[:k]
        ep[live] = base + occ[k:]
    ep = np.maximum(ep, sp)
    return sp, ep


def count_many(idx: FMIndex, patterns: Sequence[bytes], trace: AccessTrace | None = None) -> np.ndarray:
    """Occurrence counts for a batch of patterns; equal to calling count() on each."""
    if any(len(p) == 0 for p in patterns):
        raise ValueError("patterns must be non-empty")
    if not patterns:
        return np.zeros(0, dtype=np.int64)
    mat, lens, missing = _symbol_matrix(idx, patterns)
    sp0, ep0 = idx.initial_range()
    sp = np.full(len(patterns), sp0, dtype=np.int64)
    ep = np.where(missing, sp0, ep0).astype(np.int64)
    sp, ep = search_many(idx, mat, lens, sp, ep, trace)
    return ep - sp


class FmDummy1Index(FMIndex):
    """One interleaved rank vector per symbol over the BWT."""

    variant = "dummy1"

    def __init__(self, layout: RankLayout, symbols: Sequence[int], buffer: np.ndarray,
                 stride: int, c_array: np.ndarray, bwt_length: int, n: int):
        self.layout = layout
        self.symbols = tuple(int(s) for s in symbols)
        self.buffer = buffer
        self.stride = stride
        self.c_array = np.asarray(c_array, dtype=np.int64)
        self.bwt_length = bwt_length
        self.n = n
        self.row_of = np.full(max(len(self.c_array), 258, max(self.symbols, default=0) + 2), -1, dtype=np.int64)
        for row, s in enumerate(self.symbols):
            self.row_of[s] = row
        self.nblocks = max(1, -(-bwt_length // layout.data_bits))
        self.vectors: List[InterleavedRankVector] = [
            InterleavedRankVector(buffer[row * stride:(row + 1) * stride], bwt_length, layout)
            for row in range(len(self.symbols))
        ]

    def vector(self, symbol: int) -> InterleavedRankVector:
        return self.vectors[self.row_of[symbol]]

    def occ(self, c: int, pos: int, trace: AccessTrace | None = None) -> int:
        row = self.row_of[c] if 0 <= c < len(self.row_of) else -1
        if row < 0:
            if not 0 <= pos <= self.bwt_length:
                raise IndexError(pos)
            return 0
        return self.vectors[row].rank1(pos, trace)

    def occ_many(self, cs, pos, trace: AccessTrace | None = None) -> np.ndarray:
        cs = np.asarray(cs, dtype=np.int64)
        pos = np.asarray(pos, dtype=np.int64)
        rows = self.row_of[cs]
        out = np.zeros(len(cs), dtype=np.int64)
        have = rows >= 0
        if have.all():
            return self._rank(rows, pos, trace)
        out[have] = self._rank(rows[have], pos[have], trace)
        return out

    def _rank(self, rows, pos, trace):
        blk, r = locate(pos, self.layout.data_bits, self.nblocks)
        base = rows * self.stride + blk * self.layout.words_per_block
        return rank_words(self.buffer, self.layout, base, r, trace)

    def translate(self, pattern: bytes) -> Optional[np.ndarray]:
        syms = np.frombuffer(pattern, dtype=np.uint8).astype(np.int64) + 1
        if (self.row_of[syms] < 0).any():
            return None
        return syms

    @property
    def nbytes(self) -> int:
        return len(self.symbols) * self.stride * 8 + self.c_array.nbytes


def _stride_words(length: int, layout: RankLayout) -> int:
    nblocks = max(1, -(-length // layout.data_bits))
    words = nblocks * layout.words_per_block
    return -(-words // 8) * 8  # keep every vector on a cache-line boundary


def dummy1_from_bwt(res: BwtResult, layout: RankLayout, symbols: Sequence[int], n: int,
                    cls=FmDummy1Index) -> FmDummy1Index:
    length = len(res.bwt)
    stride = _stride_words(length, layout)
    buffer = aligned_zeros(stride * len(symbols))
    for row, sym in enumerate(symbols):
        pack_blocks(res.bwt == sym, layout, out=buffer[row * stride:(row + 1) * stride])
    return cls(layout, symbols, buffer, stride, res.c_array, length, n)


def build_dummy1(t: Text, layout: RankLayout, bwt: BwtResult | None = None) -> FmDummy1Index:
    if t.sigma > DUMMY1_SIGMA_LIMIT:
        warnings.warn(f"FM-dummy1 over {t.sigma} symbols uses one bit vector per symbol; "
                      f"it is intended for at most {DUMMY1_SIGMA_LIMIT}", stacklevel=2)
    if bwt is None:
        bwt = bwt_from_text(sentinel_text(t.data))
    return dummy1_from_bwt(bwt, layout, [a + 1 for a in t.alphabet], t.n)


class FmDummy2Index(FMIndex):
    """Dense-coded text indexed by one rank vector per digit value."""

    def __init__(self, code: DenseCode, inner: FmDummy1Index):
        self.code = code
        self.inner = inner
        self.c_array = inner.c_array
        self.bwt_length = inner.bwt_length
        self.n = inner.n
        self.variant = "dummy2cb" if code.params.family == CB else "dummy2"

    @property
    def params(self) -> DenseCodeParams:
        return self.code.params

    def occ(self, c, pos, trace=None):
        return self.inner.occ(c, pos, trace)

    def occ_many(self, cs, pos, trace=None):
        return self.inner.occ_many(cs, pos, trace)

    def translate(self, pattern: bytes) -> Optional[np.ndarray]:
        try:
            return self.code.encode(pattern).astype(np.int64) + 1
        except DenseCodeError:
            return None

    def initial_range(self) -> Tuple[int, int]:
        if self.code.params.family == CB:
            # sentinel row plus every row starting with a beginner digit (codes 1..b)
            return 0, int(self.c_array[self.code.params.b + 1])
        return 0, self.bwt_length

    def full_range(self) -> Tuple[int, int]:
        return 0, self.bwt_length

    @property
    def nbytes(self) -> int:
        return self.inner.nbytes


def build_dummy2(t: Text, params: DenseCodeParams, layout: RankLayout) -> FmDummy2Index:
    code = derive_code(t.frequencies(), params)
    digits = code.encode(t.data)
    st = sentinel_text(digits)
    res = bwt_from_text(st)
    if len(res.c_array) < params.radix + 2:
        c = np.full(params.radix + 2, res.c_array[-1], dtype=np.int64)
        c[: len(res.c_array)] = res.c_array
        res = BwtResult(res.bwt, c, res.primary_row)
    inner = dummy1_from_bwt(res, layout, list(range(1, params.radix + 1)), len(digits))
    return FmDummy2Index(code, inner)
