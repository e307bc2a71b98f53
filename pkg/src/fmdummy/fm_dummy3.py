"""FM-dummy3: a DNA index over {A, C, G, T, N} with symbols packed three per byte.

A block is four little-endian uint32 counters (A, C, G, T) followed by data
bytes.  Each data byte holds a triple ``x0*25 + x1*5 + x2`` with A=0 .. T=3
and N=4.  Any byte outside ``ACGT`` in the text becomes N; the sentinel is
stored as N in the packed data and only the C array knows it apart.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from ._memory import aligned_zeros
from .fm_engine import FMIndex
from .rank_bitvector import AccessTrace, locate
from .suffix_bwt import BwtResult, bwt_from_text, sentinel_text
from .text_corpus import Text

DNA = b"ACGT"
N_VALUE = 4
COUNTER_BYTES = 16
SYMBOLS_PER_BLOCK = {512: 144, 1024: 336}


class InvalidDNAPattern(ValueError):
    """Patterns for FM-dummy3 must be over A, C, G, T."""


def pack_triple(x0: int, x1: int, x2: int) -> int:
    return x0 * 25 + x1 * 5 + x2


def unpack_triple(byte: int) -> tuple:
    return byte // 25, (byte // 5) % 5, byte % 5


def _luts():
    triples = np.array([unpack_triple(b) for b in range(125)], dtype=np.int64)
    hits = np.stack([triples == c for c in range(4)], axis=2).astype(np.int64)  # (125, 3, 4)
    prefix1 = hits[:, 0, :]
    prefix2 = prefix1 + hits[:, 1, :]
    full = prefix2 + hits[:, 2, :]
    return full, prefix1, prefix2


FULL, PREFIX1, PREFIX2 = _luts()
PARTIAL = np.stack([np.zeros_like(FULL), PREFIX1, PREFIX2])  # indexed by symbols-in-triple


def map_dna(data: bytes) -> np.ndarray:
    """Text bytes to values 0..4 (A, C, G, T, N)."""
    table = np.full(256, N_VALUE, dtype=np.int32)
    for v, ch in enumerate(DNA):
        table[ch] = v
    return table[np.frombuffer(data, dtype=np.uint8)]


class FmDummy3Index(FMIndex):
    variant = "dummy3"

    def __init__(self, blocks: np.ndarray, c_array: np.ndarray, n: int, block_bits: int):
        if block_bits not in SYMBOLS_PER_BLOCK:
            raise ValueError("block_bits must be 512 or 1024")
        self.blocks = blocks  # flat uint8, nblocks * block_bytes
        self.c_array = np.asarray(c_array, dtype=np.int64)
        self.n = n
        self.bwt_length = n + 1
        self.block_bits = block_bits
        self.block_bytes = block_bits // 8
        self.per_block = SYMBOLS_PER_BLOCK[block_bits]
        self.nblocks = max(1, -(-self.bwt_length // self.per_block))
        self._bytes = memoryview(blocks).cast("B")
        # derived lookup data, rebuilt on load
        self._translate = [bytes(FULL[:, c].tolist() + [0] * 131) for c in range(4)]
        self._partial = PARTIAL.tolist()

    def counter(self, block: int, c: int) -> int:
        off = block * self.block_bytes + 4 * c
        return int.from_bytes(self._bytes[off:off + 4], "little")

    def data_bytes(self) -> np.ndarray:
        grid = self.blocks.reshape(self.nblocks, self.block_bytes)
        return grid[:, COUNTER_BYTES:].reshape(-1)

    def _check_symbol(self, c: int) -> int:
        if not 1 <= c <= 4:
            raise InvalidDNAPattern("FM-dummy3 answers occ only for A, C, G and T")
        return c - 1

    def occ(self, c: int, pos: int, trace: AccessTrace | None = None) -> int:
        ci = self._check_symbol(c)
        if not 0 <= pos <= self.bwt_length:
            raise IndexError(f"occ position {pos} outside 0..{self.bwt_length}")
        blk, r = locate(pos, self.per_block, self.nblocks)
        off = blk * self.block_bytes
        start = off + COUNTER_BYTES
        q, rem = divmod(r, 3)
        total = int.from_bytes(self._bytes[off + 4 * ci:off + 4 * ci + 4], "little")
        total += sum(self._bytes[start:start + q].tobytes().translate(self._translate[ci]))
        last = start + q - 1
        if rem:
            total += self._partial[rem][self._bytes[start + q]][ci]
            last = start + q
        if trace is not None:
            trace.record(blk, [off, max(off, last)], 0, self.block_bytes)
        return total

    def occ_many(self, cs, pos, trace: AccessTrace | None = None) -> np.ndarray:
        cs = np.asarray(cs, dtype=np.int64)
        pos = np.asarray(pos, dtype=np.int64)
        if cs.size and (cs.min() < 1 or cs.max() > 4):
            raise InvalidDNAPattern("FM-dummy3 answers occ only for A, C, G and T")
        ci = cs - 1
        blk, r = locate(pos, self.per_block, self.nblocks)
        off = blk * self.block_bytes
        counters = self.blocks.reshape(self.nblocks, self.block_bytes)[:, :COUNTER_BYTES]
        counters = counters.copy().view("<u4")
        total = counters[blk, ci].astype(np.int64)
        q, rem = np.divmod(r, 3)
        width = int(q.max()) if q.size else 0
        if width:
            cols = np.arange(width, dtype=np.int64)
            data = self.blocks[off[:, None] + COUNTER_BYTES + np.minimum(cols, self.per_block // 3 - 1)]
            hits = FULL[data, ci[:, None]]
            total += np.where(cols < q[:, None], hits, 0).sum(axis=1)
        tail = rem > 0
        if tail.any():
            b = self.blocks[off[tail] + COUNTER_BYTES + q[tail]]
            total[tail] += PARTIAL[rem[tail], b, ci[tail]]
        if trace is not None:
            last = off + COUNTER_BYTES + q - 1 + tail
            trace.record_many(blk, np.stack([off, np.maximum(off, last)], axis=1),
                              np.ones((len(off), 2), dtype=bool), self.block_bytes)
        return total

    def translate(self, pattern: bytes) -> Optional[np.ndarray]:
        vals = map_dna(pattern)
        if (vals == N_VALUE).any():
            raise InvalidDNAPattern(f"pattern {pattern[:32]!r} contains symbols outside ACGT")
        return vals.astype(np.int64) + 1

    @property
    def nbytes(self) -> int:
        return self.nblocks * self.block_bytes + self.c_array.nbytes


def pack_bwt(bwt: np.ndarray, block_bits: int) -> np.ndarray:
    """Pack a BWT over codes 0 (sentinel), 1..5 (A..N) into the block array."""
    per_block = SYMBOLS_PER_BLOCK[block_bits]
    block_bytes = block_bits // 8
    vals = np.where(bwt == 0, N_VALUE, bwt - 1).astype(np.int64)
    nblocks = max(1, -(-len(vals) // per_block))
    padded = np.full(nblocks * per_block, N_VALUE, dtype=np.int64)
    padded[: len(vals)] = vals
    trip = padded.reshape(-1, 3)
    data = (trip[:, 0] * 25 + trip[:, 1] * 5 + trip[:, 2]).astype(np.uint8).reshape(nblocks, -1)
    per = np.stack([(padded.reshape(nblocks, per_block) == c).sum(axis=1) for c in range(4)], axis=1)
    counters = np.zeros((nblocks, 4), dtype=np.int64)
    counters[1:] = np.cumsum(per, axis=0)[:-1]
    if counters.size and counters.max() >= 1 << 32:
        raise OverflowError("FM-dummy3 uses 32-bit counters; text too long")
    out = aligned_zeros(nblocks * block_bytes, np.uint8)
    grid = out.reshape(nblocks, block_bytes)
    grid[:, :COUNTER_BYTES] = counters.astype("<u4").view(np.uint8).reshape(nblocks, COUNTER_BYTES)
    grid[:, COUNTER_BYTES:] = data
    return out


def build_dummy3(t: Text, block_bits: int = 512, bwt: BwtResult | None = None) -> FmDummy3Index:
    if block_bits not in SYMBOLS_PER_BLOCK:
        raise ValueError("block_bits must be 512 or 1024")
    if t.n + 1 >= 1 << 32:
        raise OverflowError("FM-dummy3 supports texts shorter than 2**32 - 1")
    if bwt is None:
        bwt = bwt_from_text(dna_sentinel_text(t))
    elif len(bwt.bwt) != t.n + 1 or int(bwt.bwt.max()) > N_VALUE + 1:
        raise ValueError("FM-dummy3 needs the BWT of the ACGTN-mapped text (dna_sentinel_text)")
    c = np.zeros(7, dtype=np.int64)
    c[: len(bwt.c_array)] = bwt.c_array
    c[len(bwt.c_array):] = bwt.c_array[-1]
    return FmDummy3Index(pack_bwt(bwt.bwt, block_bits), c, t.n, block_bits)


def dna_sentinel_text(t: Text) -> np.ndarray:
    return sentinel_text(map_dna(t.data))
