import numpy as np
import pytest

from fmdummy._memory import is_aligned
from fmdummy.dense_code import DenseCodeParams
from fmdummy.fm_dummy3 import build_dummy3
from fmdummy.fm_engine import build_dummy1, build_dummy2, count_many
from fmdummy.fm_hwt import build_hwt_index
from fmdummy.hash_boost import boosted_count_many, kgram_table_for
from fmdummy.index_io import (ALIGN, BadMagicError, ChecksumError, IndexFormatError,
                              TruncatedFileError, UnknownVariantError, UnsupportedVersionError,
                              dumps, load, loads, save)
from fmdummy.rank_bitvector import LAYOUTS
from fmdummy.text_corpus import Text

from conftest import random_dna


@pytest.fixture(scope="module")
def dna_text():
    return Text(random_dna(np.random.default_rng(3), 6000))


def builds(t):
    out = [build_dummy1(t, lay) for lay in LAYOUTS.values()]
    out += [build_dummy2(t, DenseCodeParams.scbdc(4, 2, 4, 6), LAYOUTS["256c"]),
            build_dummy2(t, DenseCodeParams.cb(4, 3), LAYOUTS["512/32"]),
            build_dummy3(t, 512), build_dummy3(t, 1024)]
    out += [build_hwt_index(t, r, b) for r, b in ((2, 512), (4, 512), (4, 1024), (8, 512), (8, 1024))]
    return out


def test_round_trip_all_variants(dna_text, tmp_path):
    data = dna_text.data
    rng = np.random.default_rng(1)
    pats = [data[i:i + m] for i, m in zip(rng.integers(0, 5980, 300), rng.integers(1, 15, 300))]
    for idx in builds(dna_text):
        path = tmp_path / "x.idx"
        written = save(idx, None, path)
        assert written == path.stat().st_size
        again, table = load(path)
        assert table is None and type(again) is type(idx)
        assert count_many(again, pats).tolist() == count_many(idx, pats).tolist()
        assert dumps(again) == path.read_bytes()


def test_round_trip_with_table(dna_text):
    data = dna_text.data
    pats = [data[i:i + 8] for i in range(0, 5000, 37)]
    for idx in (build_dummy1(dna_text, LAYOUTS["512c"]), build_dummy3(dna_text, 512),
                build_hwt_index(dna_text, 4, 512)):
        tbl = kgram_table_for(idx, dna_text)
        idx2, tbl2 = loads(dumps(idx, tbl))
        assert tbl2.k == 5 and tbl2.buckets == tbl.buckets and tbl2.load_factor == pytest.approx(0.9)
        assert boosted_count_many(idx2, tbl2, pats).tolist() == boosted_count_many(idx, tbl, pats).tolist()


def test_deterministic_and_aligned(dna_text):
    idx = build_hwt_index(dna_text, 8, 1024)
    blob = dumps(idx)
    assert blob == dumps(idx) == dumps(build_hwt_index(dna_text, 8, 1024))
    again, _ = loads(blob)
    assert is_aligned(again.buffer)
    # every payload begins on a 64-byte file offset
    pos = 6 + 32 + 16 + 4
    import struct
    (nsec,) = struct.unpack_from("<I", blob, pos - 4)
    for _ in range(nsec):
        tag, length = struct.unpack_from("<4sQ", blob, pos)
        pos += 12
        pos += -pos % ALIGN
        assert pos % ALIGN == 0
        pos += length


def test_header_fields(dna_text):
    blob = dumps(build_dummy3(dna_text, 512))
    assert blob[:4] == b"FMDX" and blob[4] == 1 and blob[5] == 4


def test_load_errors(dna_text):
    blob = dumps(build_dummy1(dna_text, LAYOUTS["512/64"]))
    with pytest.raises(BadMagicError):
        loads(b"XXXX" + blob[4:])
    with pytest.raises(UnsupportedVersionError):
        loads(blob[:4] + b"\x02" + blob[5:])
    with pytest.raises(UnknownVariantError):
        loads(blob[:5] + b"\x09" + blob[6:])
    with pytest.raises(ChecksumError):
        loads(blob[:100] + bytes([blob[100] ^ 1]) + blob[101:])
    for cut in (3, 20, len(blob) // 2, len(blob) - 1):
        with pytest.raises(IndexFormatError):
            loads(blob[:cut])


def test_truncated_body_with_valid_checksum(dna_text):
    import struct
    import zlib
    blob = dumps(build_dummy1(dna_text, LAYOUTS["512/64"]))
    body = blob[:-4][: len(blob) // 2]
    forged = body + struct.pack("<I", zlib.crc32(body[6:]))
    with pytest.raises(TruncatedFileError):
        loads(forged)
