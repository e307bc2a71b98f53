"""Single-file serialization of every index variant (format ``FMDX`` v1).

Layout, all integers little-endian::

    offset 0   "FMDX"                 magic
    offset 4   u8 version (= 1)
    offset 5   u8 variant             1 dummy1, 2 dummy2 (s,c,b,o), 3 dummy2 (c,b),
                                      4 dummy3, 5 hwt
    offset 6   32-byte parameter block (see PARAMS)
    offset 38  u64 n, u64 bwt_length
    offset 54  u32 section count
    sections   4-byte tag, u64 payload length, zero padding up to the next
               file offset divisible by 64, payload
    trailer    u32 CRC-32 of bytes [6, end - 4)

Payload arrays start on 64-byte file offsets so a memory-mapped file keeps
the block alignment.  Derived tables (the FM-dummy3 lookup tables) are not
stored.
"""
from __future__ import annotations

import os
import struct
import zlib
from typing import Dict, Optional, Tuple

import numpy as np

from ._memory import aligned_copy
from .dense_code import CB, SCBDC, DenseCode, DenseCodeParams
from .fm_dummy3 import FmDummy3Index
from .fm_engine import FMIndex, FmDummy1Index, FmDummy2Index
from .fm_hwt import FmHwtIndex, HuffmanShape
from .hash_boost import KGramTable
from .rank_bitvector import RankLayout

MAGIC = b"FMDX"
VERSION = 1
VARIANTS = {"dummy1": 1, "dummy2": 2, "dummy2cb": 3, "dummy3": 4, "hwt": 5}
# rank block bits, counter bits, subcounts, block bits, arity, code family,
# s, c, b, o, digit bits, prefetch, k, load factor (x 1e6), 12 reserved bytes
PARAMS = struct.Struct("<HBBHBBBBBBBBHI12x")
LENGTHS = struct.Struct("<QQ")
SECTION = struct.Struct("<4sQ")
ALIGN = 64


class IndexFormatError(ValueError):
    pass


class BadMagicError(IndexFormatError):
    pass


class UnsupportedVersionError(IndexFormatError):
    pass


class UnknownVariantError(IndexFormatError):
    pass


class ChecksumError(IndexFormatError):
    pass


class TruncatedFileError(IndexFormatError):
    pass


def _params(idx: FMIndex, table: Optional[KGramTable]) -> Tuple[int, bytes]:
    rank_bits = counter = sub = block = arity = fam = s = c = b = o = dbits = 0
    if isinstance(idx, FmDummy2Index):
        lay = idx.inner.layout
        p = idx.code.params
        fam = 1 if p.family == SCBDC else 2
        s, c, b, o, dbits = p.s, p.c, p.b, p.o, p.digit_bits
        variant = VARIANTS[idx.variant]
    elif isinstance(idx, FmDummy1Index):
        lay = idx.layout
        variant = VARIANTS["dummy1"]
    else:
        lay = None
        if isinstance(idx, FmDummy3Index):
            variant = VARIANTS["dummy3"]
            block = idx.block_bits
        elif isinstance(idx, FmHwtIndex):
            variant = VARIANTS["hwt"]
            block, arity = idx.block_bits, idx.arity
        else:
            raise TypeError(f"cannot serialize {type(idx).__name__}")
    if lay is not None:
        rank_bits, counter, sub = lay.block_bits, lay.counter_bits, int(lay.subcounts)
    k = table.k if table is not None else 0
    lf = round(table.load_factor * 1e6) if table is not None else 0
    raw = PARAMS.pack(rank_bits, counter, sub, block, arity, fam, s, c, b, o, dbits,
                      int(bool(idx.prefetch)), k, lf)
    return variant, raw


def _sections(idx: FMIndex, table: Optional[KGramTable]) -> Dict[bytes, np.ndarray]:
    out: Dict[bytes, np.ndarray] = {b"CARR": idx.c_array.astype("<i8")}
    inner = idx.inner if isinstance(idx, FmDummy2Index) else idx
    if isinstance(idx, FmDummy2Index):
        out[b"CODE"] = np.array(idx.code.symbols, dtype="<u2")
    if isinstance(inner, FmDummy1Index):
        out[b"SYMS"] = np.array(inner.symbols, dtype="<u2")
        out[b"RANK"] = inner.buffer.astype("<u8")
    elif isinstance(idx, FmDummy3Index):
        out[b"BLKS"] = idx.blocks
    elif isinstance(idx, FmHwtIndex):
        topo = []
        for row in idx.shape.children:
            for child in row:
                if child is None:
                    topo.append(-1)
                elif child[0] == "node":
                    topo.append(2 * child[1])
                else:
                    topo.append(2 * child[1] + 1)
        out[b"TOPO"] = np.array(topo, dtype="<i4")
        out[b"OFFS"] = idx.offsets.astype("<i8")
        out[b"LENS"] = idx.lengths.astype("<i8")
        out[b"NODE"] = idx.buffer.astype("<u8")
    if table is not None:
        out[b"HKEY"] = table.keys
        out[b"HSP_"] = table.sp.astype("<u8")
        out[b"HEP_"] = table.ep.astype("<u8")
    return out


def dumps(idx: FMIndex, table: Optional[KGramTable] = None) -> bytes:
    variant, params = _params(idx, table)
    buf = bytearray(MAGIC + bytes([VERSION, variant]))
    buf += params
    buf += LENGTHS.pack(idx.n, idx.bwt_length)
    sections = _sections(idx, table)
    buf += struct.pack("<I", len(sections))
    for tag, arr in sections.items():
        payload = np.ascontiguousarray(arr).tobytes()
        buf += SECTION.pack(tag, len(payload))
        buf += bytes(-len(buf) % ALIGN)
        buf += payload
    buf += struct.pack("<I", zlib.crc32(bytes(buf[6:])))
    return bytes(buf)


def save(idx: FMIndex, table: Optional[KGramTable], path: str | os.PathLike) -> int:
    data = dumps(idx, table)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def _array(raw: bytes, dtype) -> np.ndarray:
    return aligned_copy(np.frombuffer(raw, dtype=dtype))


def loads(data: bytes) -> Tuple[FMIndex, Optional[KGramTable]]:
    head = 6 + PARAMS.size + LENGTHS.size + 4
    if len(data) < 6 or data[:4] != MAGIC:
        raise BadMagicError("not an FMDX index file")
    if data[4] != VERSION:
        raise UnsupportedVersionError(f"format version {data[4]} is not supported")
    variant = data[5]
    if variant not in VARIANTS.values():
        raise UnknownVariantError(f"unknown variant id {variant}")
    if len(data) < head + 4:
        raise TruncatedFileError("file ends inside the header")
    (crc,) = struct.unpack_from("<I", data, len(data) - 4)
    if zlib.crc32(data[6:-4]) != crc:
        raise ChecksumError("checksum mismatch (file corrupt or truncated)")
    (rank_bits, counter, sub, block, arity, fam, s, c, b, o, dbits, prefetch, k, lf) = \
        PARAMS.unpack_from(data, 6)
    n, bwt_length = LENGTHS.unpack_from(data, 6 + PARAMS.size)
    (count,) = struct.unpack_from("<I", data, head - 4)
    pos = head
    sec: Dict[bytes, bytes] = {}
    for _ in range(count):
        if pos + SECTION.size > len(data) - 4:
            raise TruncatedFileError("section header past end of file")
        tag, length = SECTION.unpack_from(data, pos)
        pos += SECTION.size
        pos += -pos % ALIGN
        if pos + length > len(data) - 4:
            raise TruncatedFileError(f"section {tag!r} past end of file")
        sec[tag] = data[pos:pos + length]
        pos += length
    try:
        idx = _rebuild(variant, sec, rank_bits, counter, sub, block, arity, fam,
                       (s, c, b, o, dbits), n, bwt_length)
    except KeyError as exc:
        raise IndexFormatError(f"missing section {exc}") from None
    idx.prefetch = bool(prefetch)
    table = None
    if k:
        keys = np.frombuffer(sec[b"HKEY"], dtype=np.uint8).reshape(-1, k).copy()
        table = KGramTable(k, keys, _array(sec[b"HSP_"], "<u8"), _array(sec[b"HEP_"], "<u8"), lf / 1e6)
    return idx, table


def _rebuild(variant, sec, rank_bits, counter, sub, block, arity, fam, code_params, n, bwt_length):
    c_array = _array(sec[b"CARR"], "<i8")
    if variant in (1, 2, 3):
        layout = RankLayout(rank_bits, counter, bool(sub))
        symbols = np.frombuffer(sec[b"SYMS"], dtype="<u2").tolist()
        buffer = _array(sec[b"RANK"], "<u8")
        stride = len(buffer) // max(1, len(symbols))
        inner_n = bwt_length - 1
        inner = FmDummy1Index(layout, symbols, buffer, stride, c_array, bwt_length, inner_n)
        if variant == 1:
            return inner
        s, c, b, o, dbits = code_params
        family = SCBDC if fam == 1 else CB
        params = DenseCodeParams(family, s=s, c=c, b=b, o=o, digit_bits=dbits)
        code = DenseCode(params, tuple(np.frombuffer(sec[b"CODE"], dtype="<u2").tolist()))
        idx = FmDummy2Index(code, inner)
        idx.n = n
        return idx
    if variant == 4:
        return FmDummy3Index(_array(sec[b"BLKS"], np.uint8), c_array, n, block)
    topo = np.frombuffer(sec[b"TOPO"], dtype="<i4").tolist()
    children = []
    for i in range(0, len(topo), arity):
        row = []
        for v in topo[i:i + arity]:
            row.append(None if v < 0 else (("node", v // 2) if v % 2 == 0 else ("leaf", v // 2)))
        children.append(row)
    shape = HuffmanShape(arity, children)
    return FmHwtIndex(shape, block, _array(sec[b"NODE"], "<u8"), _array(sec[b"OFFS"], "<i8"),
                      _array(sec[b"LENS"], "<i8"), c_array, n)


def load(path: str | os.PathLike) -> Tuple[FMIndex, Optional[KGramTable]]:
    with open(path, "rb") as fh:
        return loads(fh.read())
