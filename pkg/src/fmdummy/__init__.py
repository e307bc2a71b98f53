"""Cache-friendly FM-index variants with interleaved rank bit vectors."""
from .dense_code import DenseCode, DenseCodeParams, codeword_capacity, derive_code
from .fm_dummy3 import FmDummy3Index, build_dummy3
from .fm_engine import CountResult, FMIndex, FmDummy1Index, FmDummy2Index, build_dummy1, build_dummy2, count, count_many
from .fm_hwt import FmHwtIndex, build_huffman_shape, build_hwt_index
from .hash_boost import KGramTable, boosted_count, boosted_count_many, build_kgram_table, kgram_table_for
from .index_io import load, save
from .rank_bitvector import LAYOUTS, InterleavedRankVector, RankLayout, build_rank, overhead_ratio
from .suffix_bwt import build_bwt, build_suffix_array, naive_count, naive_occ, sentinel_text
from .text_corpus import PatternSet, Text, extract_patterns, load_text

__all__ = [
    "CountResult", "DenseCode", "DenseCodeParams", "FMIndex", "FmDummy1Index", "FmDummy2Index",
    "FmDummy3Index", "FmHwtIndex", "InterleavedRankVector", "KGramTable", "LAYOUTS", "PatternSet",
    "RankLayout", "Text", "boosted_count", "boosted_count_many", "build_bwt", "build_dummy1",
    "build_dummy2", "build_dummy3", "build_huffman_shape", "build_hwt_index", "build_kgram_table",
    "build_rank", "build_suffix_array", "codeword_capacity", "count", "count_many", "derive_code",
    "extract_patterns", "kgram_table_for", "load", "load_text", "naive_count", "naive_occ",
    "overhead_ratio", "save", "sentinel_text",
]
