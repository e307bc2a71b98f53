"""Uncompressed bit vectors with rank counters interleaved into each block.

Every block is ``block_bits`` wide and starts with a header (one counter, and
for the ``c`` layouts a few subcount bytes) followed by data bits, so a rank
query reads a single block.  Bit ``k`` of a 64-bit data word is its ``k``-th
least significant bit.

Header word layouts (little-endian 64-bit word 0 of each block):

    512/64, 256/64   bits 0..63   counter
    512/32, 256/32   bits 0..31   counter, bits 32..63 hold data bits 0..31
    256c             bits 0..47   counter, byte 6 = ones in data[0:64],
                                  byte 7 = ones in data[0:128]
    512c             bits 0..39   counter, bytes 5, 6, 7 = ones in the
                                  128-bit data subblocks 0, 1, 2
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._memory import LOW_MASKS, aligned_zeros

_M32 = 0xFFFFFFFF


@dataclass(frozen=True)
class RankLayout:
    block_bits: int
    counter_bits: int
    subcounts: bool = False

    def __post_init__(self):
        valid = {(512, 64, False), (512, 32, False), (256, 64, False), (256, 32, False),
                 (256, 48, True), (512, 40, True)}
        if (self.block_bits, self.counter_bits, self.subcounts) not in valid:
            raise ValueError(f"unsupported rank layout {self}")

    @property
    def header_bits(self) -> int:
        return 64 if (self.counter_bits == 64 or self.subcounts) else 32

    @property
    def data_bits(self) -> int:
        return self.block_bits - self.header_bits

    @property
    def words_per_block(self) -> int:
        return self.block_bits // 64

    @property
    def name(self) -> str:
        if self.subcounts:
            return f"{self.block_bits}c"
        return f"{self.block_bits}/{self.counter_bits}"

    @classmethod
    def parse(cls, name: str) -> "RankLayout":
        try:
            return LAYOUTS[name]
        except KeyError:
            raise ValueError(f"unknown rank layout {name!r}") from None


LAYOUTS = {
    "512/64": RankLayout(512, 64),
    "512/32": RankLayout(512, 32),
    "256/64": RankLayout(256, 64),
    "256/32": RankLayout(256, 32),
    "256c": RankLayout(256, 48, True),
    "512c": RankLayout(512, 40, True),
}


def overhead_ratio(layout: RankLayout) -> Fraction:
    return Fraction(layout.header_bits, layout.data_bits)


class AccessTrace:
    """Records which words each rank query touched.

    A query is compliant when every word it reads (header included) lies in
    the block that holds the queried position.
    """

    def __init__(self):
        self.calls = 0
        self.violations = 0
        self.max_popcounts = 0
        self.max_words = 0

    def record(self, block: int, words, popcounts: int, words_per_block: int):
        self.calls += 1
        words = list(words)
        if any(w // words_per_block != block for w in words):
            self.violations += 1
        self.max_popcounts = max(self.max_popcounts, popcounts)
        self.max_words = max(self.max_words, len(words))

    def record_many(self, blocks: np.ndarray, words: np.ndarray, used: np.ndarray,
                    words_per_block: int):
        """``words`` is a (queries, k) matrix of word indices, ``used`` marks the ones read."""
        if blocks.size == 0:
            return
        self.calls += int(blocks.size)
        bad = (words // words_per_block != blocks[:, None]) & used
        self.violations += int(bad.any(axis=1).sum())
        per_query = used.sum(axis=1)
        self.max_words = max(self.max_words, int(per_query.max()))

    def note_popcounts(self, counts: np.ndarray):
        if counts.size:
            self.max_popcounts = max(self.max_popcounts, int(counts.max()))

    @property
    def ok(self) -> bool:
        return self.violations == 0


def locate(j, data_bits: int, nblocks: int):
    """Block index and in-block data offset for prefix length ``j``.

    The final prefix (``j`` equal to ``nblocks * data_bits``) is served by the
    last block with a full-block offset, so no sentinel block is needed.
    """
    if isinstance(j, np.ndarray):
        blk = np.minimum(j // data_bits, nblocks - 1)
    else:
        blk = min(j // data_bits, nblocks - 1)
    return blk, j - blk * data_bits


def rank_words(words: np.ndarray, layout: RankLayout, base: np.ndarray, r: np.ndarray,
               trace: AccessTrace | None = None) -> np.ndarray:
    """Vectorised rank over blocks starting at word offsets ``base`` with data offsets ``r``."""
    W = layout.words_per_block
    base = np.asarray(base, dtype=np.int64)
    r = np.asarray(r, dtype=np.int64)
    head = words[base]
    if layout.subcounts:
        counter = head & np.uint64((1 << layout.counter_bits) - 1)
        if layout.block_bits == 256:
            q = np.minimum(r >> 6, 2)
            jump = np.where(q == 0, 0, (head >> (np.uint64(48) + np.uint64(8) * (q - 1).clip(0).astype(np.uint64))) & np.uint64(0xFF))
            start = 64 + 64 * q
        else:
            q = np.minimum(r >> 7, 3)
            jump = np.zeros_like(counter)
            for s in range(3):
                byte = (head >> np.uint64(40 + 8 * s)) & np.uint64(0xFF)
                jump += np.where(q > s, byte, np.uint64(0))
            start = 64 + 128 * q
        total = counter + jump
    else:
        total = head & np.uint64(_M32) if layout.counter_bits == 32 else head.copy()
        start = np.full_like(r, layout.header_bits)
    end = layout.header_bits + r
    lanes = np.arange(W, dtype=np.int64) * 64
    lo = np.clip(start[:, None] - lanes, 0, 64)
    hi = np.clip(end[:, None] - lanes, 0, 64)
    used = hi > lo
    mask = LOW_MASKS[hi] & ~LOW_MASKS[lo]
    idx = base[:, None] + np.arange(W, dtype=np.int64)
    counts = np.bitwise_count(words[idx] & mask).astype(np.uint64)
    total = total + counts.sum(axis=1, dtype=np.uint64)
    if trace is not None:
        blocks = base // W
        header = np.ones((len(base), 1), dtype=bool)
        trace.record_many(blocks, np.hstack([base[:, None], idx]), np.hstack([header, used]), W)
        trace.note_popcounts(used.sum(axis=1))
    return total.astype(np.int64)


def pack_blocks(bits: np.ndarray, layout: RankLayout, out: np.ndarray | None = None) -> np.ndarray:
    """Lay ``bits`` (0/1 array) out as interleaved blocks; returns the uint64 word array."""
    bits = np.asarray(bits, dtype=np.uint8)
    D, W, hb = layout.data_bits, layout.words_per_block, layout.header_bits
    nblocks = max(1, -(-len(bits) // D))
    grid = np.zeros((nblocks, layout.block_bits), dtype=np.uint8)
    padded = np.zeros(nblocks * D, dtype=np.uint8)
    padded[: len(bits)] = bits
    grid[:, hb:] = padded.reshape(nblocks, D)
    words = np.packbits(grid, axis=1, bitorder="little").view("<u8").reshape(nblocks, W)
    data = padded.reshape(nblocks, D)
    per_block = data.sum(axis=1, dtype=np.int64)
    counters = np.concatenate(([0], np.cumsum(per_block)[:-1])).astype(np.uint64)
    if len(bits) and int(per_block.sum()) >= 1 << layout.counter_bits:
        raise OverflowError("bit vector too dense for the layout's counter width")
    header = words[:, 0]
    if layout.subcounts:
        if layout.block_bits == 256:
            s64 = data[:, :64].sum(axis=1).astype(np.uint64)
            s128 = data[:, :128].sum(axis=1).astype(np.uint64)
            header = counters | (s64 << np.uint64(48)) | (s128 << np.uint64(56))
        else:
            header = counters.copy()
            for s in range(3):
                sub = data[:, 128 * s:128 * (s + 1)].sum(axis=1).astype(np.uint64)
                header |= sub << np.uint64(40 + 8 * s)
    elif layout.counter_bits == 32:
        header = header | counters
    else:
        header = counters
    words[:, 0] = header
    if out is None:
        out = aligned_zeros(nblocks * W)
    out[: nblocks * W] = words.reshape(-1)
    return out


class InterleavedRankVector:
    def __init__(self, words: np.ndarray, length: int, layout: RankLayout):
        self.words = words
        self.length = length
        self.layout = layout
        self.nblocks = max(1, -(-length // layout.data_bits))
        if len(words) < self.nblocks * layout.words_per_block:
            raise ValueError("word array shorter than the block count requires")
        self._w = memoryview(words).cast("B").cast("Q")

    @property
    def nbytes(self) -> int:
        return self.nblocks * self.layout.block_bits // 8

    def __len__(self):
        return self.length

    def block_counter(self, i: int) -> int:
        head = self._w[i * self.layout.words_per_block]
        if self.layout.counter_bits == 32:
            return head & _M32
        return head & ((1 << self.layout.counter_bits) - 1)

    def subcounts(self, i: int) -> tuple:
        head = self._w[i * self.layout.words_per_block]
        if not self.layout.subcounts:
            return ()
        first = self.layout.counter_bits
        return tuple((head >> s) & 0xFF for s in range(first, 64, 8))

    def bit(self, i: int) -> int:
        blk, r = divmod(i, self.layout.data_bits)
        off = self.layout.header_bits + r
        return (self._w[blk * self.layout.words_per_block + (off >> 6)] >> (off & 63)) & 1

    def rank1(self, j: int, trace: AccessTrace | None = None) -> int:
        if not 0 <= j <= self.length:
            raise IndexError(f"rank position {j} outside 0..{self.length}")
        lay = self.layout
        blk, r = locate(j, lay.data_bits, self.nblocks)
        base = blk * lay.words_per_block
        w = self._w
        head = w[base]
        read = [base]
        pops = 0
        if lay.subcounts:
            total = head & ((1 << lay.counter_bits) - 1)
            if lay.block_bits == 256:
                q, rem = r >> 6, r & 63
                if q == 3:
                    q, rem = 2, 64
                if q:
                    total += (head >> (40 + 8 * q)) & 0xFF
                word = base + 1 + q
            else:
                q, rem = r >> 7, r & 127
                for s in range(q):
                    total += (head >> (40 + 8 * s)) & 0xFF
                word = base + 1 + 2 * q
                if rem >= 64:
                    total += w[word].bit_count()
                    read.append(word)
                    pops += 1
                    word += 1
                    rem -= 64
            if rem:
                total += (w[word] & ((1 << rem) - 1)).bit_count()
                read.append(word)
                pops += 1
        else:
            word = base + 1
            if lay.counter_bits == 32:
                total = head & _M32
                take = min(r, 32)
                if take:
                    total += ((head >> 32) & ((1 << take) - 1)).bit_count()
                    pops += 1
                r -= take
            else:
                total = head
            full, rem = r >> 6, r & 63
            for k in range(full):
                total += w[word + k].bit_count()
                read.append(word + k)
            pops += full
            if rem:
                total += (w[word + full] & ((1 << rem) - 1)).bit_count()
                read.append(word + full)
                pops += 1
        if trace is not None:
            trace.record(blk, read, pops, lay.words_per_block)
        return total

    def rank1_many(self, j, trace: AccessTrace | None = None) -> np.ndarray:
        j = np.asarray(j, dtype=np.int64)
        if j.size and (j.min() < 0 or j.max() > self.length):
            raise IndexError("rank position out of range")
        blk, r = locate(j, self.layout.data_bits, self.nblocks)
        return rank_words(self.words, self.layout, blk * self.layout.words_per_block, r, trace)


def build_rank(bits, layout: RankLayout) -> InterleavedRankVector:
    bits = np.asarray(bits, dtype=np.uint8)
    return InterleavedRankVector(pack_blocks(bits, layout), len(bits), layout)
