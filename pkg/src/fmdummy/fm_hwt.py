"""FM-indexes over Huffman-shaped wavelet trees of arity 2, 4 and 8.

For arity 4 and 8 a node is a run of blocks, each holding ``r`` 32-bit digit
counters (two per 64-bit word, low half first) followed by 64-bit data words
of packed digits: 32 two-bit digits per word, or 21 three-bit digits in the
low 63 bits.  Arity-2 nodes are plain bit vectors with the 512c rank layout.

All nodes of one tree share a single 64-byte aligned word buffer; node
``i`` starts at word ``offsets[i]``.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ._memory import LOW_MASKS, aligned_zeros
from .fm_engine import FMIndex
from .rank_bitvector import (LAYOUTS, AccessTrace, InterleavedRankVector, locate, pack_blocks,
                             rank_words)
from .suffix_bwt import BwtResult, bwt_from_text, sentinel_text
from .text_corpus import Text

HWT2_LAYOUT = LAYOUTS["512c"]
_M32 = 0xFFFFFFFF


@dataclass
class HuffmanShape:
    """Tree topology: ``children[i][d]`` is ``("node", j)``, ``("leaf", symbol)`` or None."""

    arity: int
    children: List[List[Optional[Tuple[str, int]]]]
    codes: Dict[int, Tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.codes:
            self.codes = {}
            self._collect(0, ())

    def _collect(self, node: int, prefix: tuple):
        for d, child in enumerate(self.children[node]):
            if child is None:
                continue
            kind, val = child
            if kind == "leaf":
                self.codes[val] = prefix + (d,)
            else:
                self._collect(val, prefix + (d,))

    def paths(self) -> Dict[int, List[Tuple[int, int]]]:
        """Per symbol, the (node, digit) pairs from the root down."""
        out: Dict[int, List[Tuple[int, int]]] = {}

        def walk(node, acc):
            for d, child in enumerate(self.children[node]):
                if child is None:
                    continue
                kind, val = child
                if kind == "leaf":
                    out[val] = acc + [(node, d)]
                else:
                    walk(val, acc + [(node, d)])

        walk(0, [])
        return out

    def cost(self, freqs: Dict[int, int]) -> int:
        return sum(freqs[s] * len(self.codes[s]) for s in freqs)


def build_huffman_shape(freqs: Dict[int, int], arity: int) -> HuffmanShape:
    """r-ary Huffman tree; zero-weight dummy leaves pad the leaf count so every merge is full."""
    if arity not in (2, 4, 8):
        raise ValueError("arity must be 2, 4 or 8")
    symbols = sorted(freqs)
    if not symbols:
        raise ValueError("at least one symbol is required")
    if len(symbols) == 1:
        return HuffmanShape(arity, [[("leaf", symbols[0])] + [None] * (arity - 1)])
    order = itertools.count()
    heap = []
    dummies = (arity - 1 - (len(symbols) - 1) % (arity - 1)) % (arity - 1)
    for _ in range(dummies):
        heapq.heappush(heap, (0, next(order), None))
    for s in symbols:
        heapq.heappush(heap, (freqs[s], next(order), ("leaf", s)))
    merged = []  # children lists in creation order; the root is created last
    while len(heap) > 1:
        group = [heapq.heappop(heap) for _ in range(arity)]
        merged.append([item[2] for item in group])
        heapq.heappush(heap, (sum(item[0] for item in group), next(order), ("tmp", len(merged) - 1)))
    # renumber internal nodes in preorder, root first
    children: List[List] = []

    def emit(tmp_id):
        me = len(children)
        children.append(None)
        row = []
        for child in merged[tmp_id]:
            if child is not None and child[0] == "tmp":
                row.append(("node", emit(child[1])))
            else:
                row.append(child)
        children[me] = row
        return me

    emit(len(merged) - 1)
    return HuffmanShape(arity, children)


def _lanes(arity: int) -> Tuple[int, int]:
    """(bits per digit, digits per 64-bit word)."""
    return {4: (2, 32), 8: (3, 21)}[arity]


def _rep(arity: int) -> int:
    bits, lanes = _lanes(arity)
    return sum(1 << (bits * i) for i in range(lanes))


class MultiaryLayout:
    def __init__(self, arity: int, block_bits: int):
        if arity not in (4, 8) or block_bits not in (512, 1024):
            raise ValueError("multiary nodes need arity 4/8 and 512/1024-bit blocks")
        self.arity = arity
        self.block_bits = block_bits
        self.words_per_block = block_bits // 64
        self.counter_words = arity // 2
        self.data_words = self.words_per_block - self.counter_words
        self.bits, self.lanes = _lanes(arity)
        self.per_block = self.data_words * self.lanes
        self.rep = _rep(arity)


def pack_digits(digits: np.ndarray, lay: MultiaryLayout) -> np.ndarray:
    n = len(digits)
    nblocks = max(1, -(-n // lay.per_block))
    padded = np.zeros(nblocks * lay.per_block, dtype=np.uint64)
    padded[:n] = digits
    shifts = (np.arange(lay.lanes, dtype=np.uint64) * np.uint64(lay.bits))
    words = (padded.reshape(-1, lay.lanes) << shifts).sum(axis=1, dtype=np.uint64)
    words = words.reshape(nblocks, lay.data_words)
    keys = (np.arange(n) // lay.per_block) * lay.arity + digits.astype(np.int64)
    per_block = np.bincount(keys, minlength=nblocks * lay.arity).reshape(nblocks, lay.arity)
    counters = np.zeros((nblocks, lay.arity), dtype=np.uint64)
    counters[1:] = np.cumsum(per_block, axis=0)[:-1]
    if n >= 1 << 32:
        raise OverflowError("32-bit digit counters overflow")
    head = counters[:, 0::2] | (counters[:, 1::2] << np.uint64(32))
    return np.hstack([head, words]).reshape(-1)


class HwtNode:
    """View of one internal node inside the shared buffer."""

    def __init__(self, tree: "FmHwtIndex", node_id: int):
        self.tree = tree
        self.id = node_id
        self.offset = int(tree.offsets[node_id])
        self.length = int(tree.lengths[node_id])
        self.arity = tree.arity

    @property
    def nblocks(self) -> int:
        return self.tree.node_blocks(self.length)

    @property
    def nbytes(self) -> int:
        return self.nblocks * self.tree.block_bits // 8

    def digit_rank(self, d: int, pos: int, trace: AccessTrace | None = None) -> int:
        if not 0 <= d < self.arity:
            raise IndexError(f"digit {d} outside 0..{self.arity - 1}")
        if not 0 <= pos <= self.length:
            raise IndexError(f"position {pos} outside 0..{self.length}")
        return self.tree._digit_rank(self.offset, self.length, d, pos, trace)

    def digits(self) -> np.ndarray:
        return np.array([self.tree._digit_at(self.offset, i) for i in range(self.length)], dtype=np.int64)


class FmHwtIndex(FMIndex):
    def __init__(self, shape: HuffmanShape, block_bits: int, buffer: np.ndarray,
                 offsets: np.ndarray, lengths: np.ndarray, c_array: np.ndarray, n: int):
        self.shape = shape
        self.arity = shape.arity
        if self.arity == 2 and block_bits != 512:
            raise ValueError("binary HWT nodes use the 512c rank layout; block_bits must be 512")
        self.block_bits = block_bits
        self.variant = f"hwt{self.arity}"
        self.buffer = buffer
        self._w = memoryview(buffer).cast("B").cast("Q")
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.lengths = np.asarray(lengths, dtype=np.int64)
        self.c_array = np.asarray(c_array, dtype=np.int64)
        self.n = n
        self.bwt_length = n + 1
        self.layout = None if self.arity == 2 else MultiaryLayout(self.arity, block_bits)
        paths = shape.paths()
        self.paths = paths
        domain = max(258, len(self.c_array), max(paths) + 1)
        depth = max(len(p) for p in paths.values())
        self.path_len = np.zeros(domain, dtype=np.int64)
        self.path_node = np.zeros((domain, depth), dtype=np.int64)
        self.path_digit = np.zeros((domain, depth), dtype=np.int64)
        for s, p in paths.items():
            self.path_len[s] = len(p)
            for k, (node, d) in enumerate(p):
                self.path_node[s, k] = node
                self.path_digit[s, k] = d
        self.nodes = [HwtNode(self, i) for i in range(len(shape.children))]
        self._vectors = {}
        if self.arity == 2:
            for node in self.nodes:
                words = buffer[node.offset:node.offset + node.nblocks * HWT2_LAYOUT.words_per_block]
                self._vectors[node.offset] = InterleavedRankVector(words, node.length, HWT2_LAYOUT)

    def node_blocks(self, length: int) -> int:
        per = HWT2_LAYOUT.data_bits if self.arity == 2 else self.layout.per_block
        return max(1, -(-length // per))

    # scalar kernels -------------------------------------------------------
    def _digit_rank(self, offset, length, d, pos, trace):
        w = self._w
        if self.arity == 2:
            ones = self._vectors[offset].rank1(pos, trace)
            return ones if d == 1 else pos - ones
        lay = self.layout
        blk, r = locate(pos, lay.per_block, self.node_blocks(length))
        base = offset + blk * lay.words_per_block
        total = (w[base + (d >> 1)] >> (32 * (d & 1))) & _M32
        pattern = d * lay.rep
        word = base + lay.counter_words
        read = [base + (d >> 1)]
        pops = 0
        while r > 0:
            q = min(r, lay.lanes)
            x = w[word] ^ pattern
            if lay.bits == 2:
                z = (x | (x >> 1)) & lay.rep
            else:
                z = (x | (x >> 1) | (x >> 2)) & lay.rep
            total += q - (z & ((1 << (lay.bits * q)) - 1)).bit_count()
            read.append(word)
            pops += 1
            word += 1
            r -= q
        if trace is not None:
            trace.record(blk, [x - offset for x in read], pops, lay.words_per_block)
        return total

    def _digit_at(self, offset, i):
        if self.arity == 2:
            blk, r = divmod(i, HWT2_LAYOUT.data_bits)
            bit = 64 + r
            return (self._w[offset + blk * 8 + (bit >> 6)] >> (bit & 63)) & 1
        lay = self.layout
        blk, r = divmod(i, lay.per_block)
        word = offset + blk * lay.words_per_block + lay.counter_words + r // lay.lanes
        return (self._w[word] >> (lay.bits * (r % lay.lanes))) & ((1 << lay.bits) - 1)

    def occ(self, c: int, pos: int, trace: AccessTrace | None = None) -> int:
        if not 0 <= pos <= self.bwt_length:
            raise IndexError(f"occ position {pos} outside 0..{self.bwt_length}")
        path = self.paths.get(c)
        if path is None:
            return 0
        pos = int(pos)
        for node, d in path:
            pos = self._digit_rank(int(self.offsets[node]), int(self.lengths[node]), d, pos, trace)
        return pos

    # vectorised kernels ---------------------------------------------------
    def _digit_rank_many(self, nodes, d, pos, trace):
        offset = self.offsets[nodes]
        length = self.lengths[nodes]
        if self.arity == 2:
            per = HWT2_LAYOUT.data_bits
            nb = np.maximum(1, -(-length // per))
            blk = np.minimum(pos // per, nb - 1)
            base = offset + blk * HWT2_LAYOUT.words_per_block
            ones = rank_words(self.buffer, HWT2_LAYOUT, base, pos - blk * per, trace)
            return np.where(d == 1, ones, pos - ones)
        lay = self.layout
        nb = np.maximum(1, -(-length // lay.per_block))
        blk = np.minimum(pos // lay.per_block, nb - 1)
        r = pos - blk * lay.per_block
        base = offset + blk * lay.words_per_block
        head = self.buffer[base + (d >> 1)]
        total = ((head >> (np.uint64(32) * (d & 1).astype(np.uint64))) & np.uint64(_M32)).astype(np.int64)
        cols = np.arange(lay.data_words, dtype=np.int64)
        q = np.clip(r[:, None] - cols * lay.lanes, 0, lay.lanes)
        idx = base[:, None] + lay.counter_words + cols
        rep = np.uint64(lay.rep)
        x = self.buffer[idx] ^ (d.astype(np.uint64)[:, None] * rep)
        if lay.bits == 2:
            z = (x | (x >> np.uint64(1))) & rep
        else:
            z = (x | (x >> np.uint64(1)) | (x >> np.uint64(2))) & rep
        mism = np.bitwise_count(z & LOW_MASKS[q * lay.bits]).astype(np.int64)
        total += (q - mism).sum(axis=1)
        if trace is not None:
            used = np.hstack([np.ones((len(base), 1), dtype=bool), q > 0])
            words = np.hstack([(base + (d >> 1))[:, None], idx]) - offset[:, None]
            trace.record_many(blk, words, used, lay.words_per_block)
            trace.note_popcounts((q > 0).sum(axis=1))
        return total

    def occ_many(self, cs, pos, trace: AccessTrace | None = None) -> np.ndarray:
        cs = np.asarray(cs, dtype=np.int64)
        pos = np.asarray(pos, dtype=np.int64).copy()
        plen = self.path_len[cs]
        pos[plen == 0] = 0
        for k in range(self.path_node.shape[1]):
            live = np.flatnonzero(plen > k)
            if live.size == 0:
                break
            c = cs[live]
            pos[live] = self._digit_rank_many(self.path_node[c, k], self.path_digit[c, k], pos[live], trace)
        return pos

    def translate(self, pattern: bytes) -> Optional[np.ndarray]:
        syms = np.frombuffer(pattern, dtype=np.uint8).astype(np.int64) + 1
        if (self.path_len[syms] == 0).any():
            return None
        return syms

    def topology_bytes(self) -> int:
        # per internal node: one (kind, value) pair of 4 bytes per digit slot
        return 4 * self.arity * len(self.shape.children)

    @property
    def nbytes(self) -> int:
        return sum(node.nbytes for node in self.nodes) + self.c_array.nbytes + self.topology_bytes()


def node_digit_sequences(shape: HuffmanShape, bwt: np.ndarray) -> List[np.ndarray]:
    """Digit sequence stored at each internal node, BWT symbols routed from the root."""
    codes = shape.codes
    domain = max(codes) + 1
    depth = max(len(c) for c in codes.values())
    digit_at = np.zeros((domain, depth), dtype=np.int64)
    for s, code in codes.items():
        digit_at[s, : len(code)] = code
    out: List[Optional[np.ndarray]] = [None] * len(shape.children)
    stack = [(0, np.asarray(bwt, dtype=np.int64), 0)]
    while stack:
        node, seq, k = stack.pop()
        digits = digit_at[seq, k]
        out[node] = digits
        for d, child in enumerate(shape.children[node]):
            if child is not None and child[0] == "node":
                stack.append((child[1], seq[digits == d], k + 1))
    return out


def build_hwt_index(t: Text, arity: int, block_bits: int = 512, bwt: BwtResult | None = None) -> FmHwtIndex:
    if t.n + 1 >= 1 << 32:
        raise OverflowError("HWT indexes use 32-bit counters")
    if arity == 2 and block_bits != 512:
        raise ValueError("binary HWT nodes use the 512c rank layout; block_bits must be 512")
    if bwt is None:
        bwt = bwt_from_text(sentinel_text(t.data))
    counts = np.bincount(bwt.bwt)
    freqs = {int(s): int(counts[s]) for s in np.flatnonzero(counts)}
    shape = build_huffman_shape(freqs, arity)
    seqs = node_digit_sequences(shape, bwt.bwt)
    packed = []
    for seq in seqs:
        if arity == 2:
            packed.append(pack_blocks(seq, HWT2_LAYOUT))
        else:
            packed.append(pack_digits(seq, MultiaryLayout(arity, block_bits)))
    offsets = np.zeros(len(packed), dtype=np.int64)
    total = 0
    for i, words in enumerate(packed):
        offsets[i] = total
        total += -(-len(words) // 8) * 8
    buffer = aligned_zeros(total)
    for off, words in zip(offsets, packed):
        buffer[off:off + len(words)] = words
    lengths = np.array([len(s) for s in seqs], dtype=np.int64)
    return FmHwtIndex(shape, block_bits, buffer, offsets, lengths, bwt.c_array, t.n)
