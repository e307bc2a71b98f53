"""Command-line front end: build, genpat, count, bench, selftest.

Exit codes: 0 success, 2 usage error, 3 data error.
"""
from __future__ import annotations

import argparse
import os
import statistics
import sys
import time
import warnings
import zlib
from dataclasses import dataclass, fields
from typing import List, Optional, Sequence

import numpy as np

from .dense_code import CB, DenseCodeError, DenseCodeParams
from .fm_dummy3 import FmDummy3Index, InvalidDNAPattern, build_dummy3
from .fm_engine import FMIndex, FmDummy1Index, FmDummy2Index, build_dummy1, build_dummy2, count_many
from .fm_hwt import FmHwtIndex, build_hwt_index
from .hash_boost import KGramTable, boosted_count_many, kgram_table_for
from .index_io import IndexFormatError, load, save
from .rank_bitvector import LAYOUTS, RankLayout
from .suffix_bwt import naive_count
from .text_corpus import ExtractionError, Text, TextError, extract_patterns, load_text, read_patterns, write_patterns

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3


class UsageError(Exception):
    pass


@dataclass
class BenchReport:
    variant: str
    params: str
    corpus: str
    m: float
    patterns: int
    total_seconds: float
    ns_per_char: float
    index_bytes: int
    index_bytes_per_n: float
    checksum: str
    total_occurrences: int

    def lines(self) -> List[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(f"{f.name}={v:.6g}" if isinstance(v, float) else f"{f.name}={v}")
        return out


def occurrence_checksum(counts: Sequence[int]) -> str:
    return f"{zlib.crc32(np.asarray(counts, dtype='<u8').tobytes()):08x}"


def describe(idx: FMIndex) -> tuple:
    if isinstance(idx, FmDummy2Index):
        p = idx.code.params
        code = f"scbo={p.s},{p.c},{p.b},{p.o}" if p.family != CB else f"cb={p.b},digit_bits={p.digit_bits}"
        return idx.variant, f"layout={idx.inner.layout.name};{code}"
    if isinstance(idx, FmDummy1Index):
        return idx.variant, f"layout={idx.layout.name}"
    if isinstance(idx, FmDummy3Index):
        return idx.variant, f"block={idx.block_bits}"
    if isinstance(idx, FmHwtIndex):
        return idx.variant, f"arity={idx.arity};block={idx.block_bits}"
    return idx.variant, ""


def _layout(args) -> RankLayout:
    name = args.layout or "512"
    if name.endswith("c"):
        if args.counter is not None:
            raise UsageError("--counter does not apply to subcount layouts")
        return LAYOUTS[name]
    return LAYOUTS[f"{name}/{args.counter or 64}"]


def _check_flags(args):
    allowed = {
        "layout": {"d1", "d2", "d2cb"}, "counter": {"d1", "d2", "d2cb"},
        "arity": {"hwt"}, "scbo": {"d2"}, "cb": {"d2cb"}, "digit_bits": {"d2cb"},
        "block": {"d3", "hwt"}, "hash_k": {"d1", "d3", "hwt"},
    }
    for flag, variants in allowed.items():
        if getattr(args, flag) is not None and args.variant not in variants:
            raise UsageError(f"--{flag.replace('_', '-')} does not apply to variant {args.variant}")
    if args.variant == "hwt" and (args.arity or 4) == 2 and (args.block or 512) != 512:
        raise UsageError("binary HWT supports only 512-bit blocks")


def build_index(text: Text, args) -> FMIndex:
    v = args.variant
    if v == "d1":
        return build_dummy1(text, _layout(args))
    if v == "d2":
        try:
            s, c, b, o = (int(x) for x in (args.scbo or "4,2,4,6").split(","))
        except ValueError:
            raise UsageError("--scbo expects four integers s,c,b,o") from None
        return build_dummy2(text, DenseCodeParams.scbdc(s, c, b, o), _layout(args))
    if v == "d2cb":
        bits = args.digit_bits or 4
        return build_dummy2(text, DenseCodeParams.cb(args.cb or (1 << bits) // 2, bits), _layout(args))
    if v == "d3":
        return build_dummy3(text, args.block or 512)
    return build_hwt_index(text, args.arity or 4, args.block or 512)


def cmd_build(args) -> int:
    _check_flags(args)
    text = load_text(args.input)
    try:
        idx = build_index(text, args)
    except DenseCodeError as exc:
        raise UsageError(str(exc)) from None
    idx.prefetch = args.prefetch == "on"
    table = None
    if args.hash_k:
        table = kgram_table_for(idx, text, args.hash_k, args.load_factor)
    written = save(idx, table, args.out)
    variant, params = describe(idx)
    print(f"variant={variant}\nparams={params}\nn={text.n}\nindex_bytes={idx.nbytes}\nfile_bytes={written}")
    if table is not None:
        print(f"hash_k={table.k}\nhash_entries={table.entries}\nhash_buckets={table.buckets}\n"
              f"hash_bytes={table.nbytes}")
    return EXIT_OK


def cmd_genpat(args) -> int:
    text = load_text(args.input)
    pats = extract_patterns(text, args.count, args.m, args.seed, args.acgt)
    write_patterns(pats, args.out)
    return EXIT_OK


def _query(idx: FMIndex, table: Optional[KGramTable], patterns: List[bytes]) -> np.ndarray:
    if table is not None:
        return boosted_count_many(idx, table, patterns)
    return count_many(idx, patterns)


def _load_patterns(path) -> List[bytes]:
    try:
        pats = read_patterns(path)
    except OSError as exc:
        raise TextError(str(exc)) from None
    if any(len(p) == 0 for p in pats):
        raise TextError("pattern file contains an empty pattern")
    return pats


def cmd_count(args) -> int:
    idx, table = load(args.idx)
    pats = _load_patterns(args.patterns)
    counts = _query(idx, table, pats)
    lines = [f"patterns={len(pats)}", f"total_occurrences={int(counts.sum())}",
             f"checksum={occurrence_checksum(counts)}"]
    if args.summary:
        print("\n".join(lines))
    else:
        sys.stdout.write("".join(f"{int(c)}\n" for c in counts))
    if args.report:
        with open(args.report, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return EXIT_OK


def run_bench(idx: FMIndex, table: Optional[KGramTable], pats: List[bytes], repeat: int,
              corpus: str, mode: str = "batch") -> BenchReport:
    if mode == "scalar":
        from .fm_engine import count
        from .hash_boost import boosted_count

        def once():
            if table is not None:
                return np.array([boosted_count(idx, table, p).occurrences for p in pats])
            return np.array([count(idx, p).occurrences for p in pats])
    else:
        def once():
            return _query(idx, table, pats)

    counts = once()  # warm-up, untimed
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        once()
        times.append(time.perf_counter() - t0)
    elapsed = statistics.median(times)
    chars = sum(len(p) for p in pats)
    size = idx.nbytes + (table.nbytes if table is not None else 0)
    variant, params = describe(idx)
    if table is not None:
        params += f";hash_k={table.k}"
    return BenchReport(variant, params, corpus, chars / max(1, len(pats)), len(pats), elapsed,
                       elapsed * 1e9 / max(1, chars), size, size / max(1, idx.n),
                       occurrence_checksum(counts), int(counts.sum()))


def cmd_bench(args) -> int:
    if args.repeat < 3:
        raise UsageError("--repeat must be at least 3")
    idx, table = load(args.idx)
    pats = _load_patterns(args.patterns)
    corpus = args.corpus or os.path.basename(args.text or args.idx)
    report = run_bench(idx, table, pats, args.repeat, corpus, args.mode)
    lines = report.lines()
    if args.text:
        data = load_text(args.text).data
        oracle = occurrence_checksum([naive_count(data, p) for p in pats])
        lines += [f"oracle_checksum={oracle}", f"verified={'yes' if oracle == report.checksum else 'no'}"]
    print("\n".join(lines))
    if args.report:
        with open(args.report, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    if args.text and oracle != report.checksum:
        return EXIT_DATA
    return EXIT_OK


def selftest_cases():
    rng = np.random.default_rng(2015)
    dna = rng.choice(np.frombuffer(b"ACGT", np.uint8), 4000).tobytes()
    corpora = {
        "abracadabra": b"abracadabra",
        "mississippi": b"mississippi",
        "dna": dna,
        "bytes64": rng.integers(32, 96, 4000).astype(np.uint8).tobytes(),
    }
    return corpora


def cmd_selftest(args) -> int:
    failures = 0
    for name, data in selftest_cases().items():
        text = Text(data)
        pats = [data[i:i + m] for m in (1, 2, 3, 5, 8) for i in range(0, max(1, len(data) - m), max(1, len(data) // 40))]
        pats = [p for p in pats if len(p)] + [b"zzzz"[: min(4, len(data))]]
        truth = np.array([naive_count(data, p) for p in pats])
        builders = [(f"d1_{lay}", lambda t, lay=lay: build_dummy1(t, LAYOUTS[lay])) for lay in LAYOUTS]
        builders += [
            ("d2_4246", lambda t: build_dummy2(t, DenseCodeParams.scbdc(4, 2, 4, 6), LAYOUTS["512c"])),
            ("d2cb_4", lambda t: build_dummy2(t, DenseCodeParams.cb(8, 4), LAYOUTS["256c"])),
            ("d2cb_3", lambda t: build_dummy2(t, DenseCodeParams.cb(4, 3), LAYOUTS["256/64"])),
        ]
        builders += [(f"hwt{r}_{b}", lambda t, r=r, b=b: build_hwt_index(t, r, b))
                     for r, b in ((2, 512), (4, 512), (4, 1024), (8, 512), (8, 1024))]
        if set(data) <= set(b"ACGT"):
            builders += [(f"d3_{b}", lambda t, b=b: build_dummy3(t, b)) for b in (512, 1024)]
        for label, make in builders:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                idx = make(text)
            keep = [isinstance(idx, FmDummy3Index) is False or set(p) <= set(b"ACGT") for p in pats]
            sub = [p for p, k in zip(pats, keep) if k]
            ok = bool((count_many(idx, sub) == truth[np.array(keep)]).all())
            failures += not ok
            print(f"{'PASS' if ok else 'FAIL'} {name} {label}")
    print(f"selftest={'ok' if failures == 0 else 'failed'} failures={failures}")
    return EXIT_OK if failures == 0 else EXIT_DATA


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fmdummy", description="Cache-friendly FM-index variants")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build and save an index")
    b.add_argument("--in", dest="input", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--variant", required=True, choices=["d1", "d2", "d2cb", "d3", "hwt"])
    b.add_argument("--layout", choices=["256", "512", "256c", "512c"])
    b.add_argument("--counter", type=int, choices=[32, 64])
    b.add_argument("--arity", type=int, choices=[2, 4, 8])
    b.add_argument("--scbo", metavar="S,C,B,O")
    b.add_argument("--cb", type=int, metavar="B", help="number of beginner digits")
    b.add_argument("--digit-bits", type=int, choices=[3, 4])
    b.add_argument("--block", type=int, choices=[512, 1024])
    b.add_argument("--hash-k", type=int)
    b.add_argument("--load-factor", type=float, default=0.9)
    b.add_argument("--prefetch", choices=["on", "off"], default="off")
    b.set_defaults(func=cmd_build)

    g = sub.add_parser("genpat", help="extract random patterns from a text")
    g.add_argument("--in", dest="input", required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--acgt", action="store_true")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_genpat)

    c = sub.add_parser("count", help="count occurrences of each pattern")
    c.add_argument("--idx", required=True)
    c.add_argument("--patterns", required=True)
    c.add_argument("--report")
    c.add_argument("--summary", action="store_true", help="print the checksum instead of per-pattern counts")
    c.set_defaults(func=cmd_count)

    be = sub.add_parser("bench", help="time count queries in ns per character")
    be.add_argument("--idx", required=True)
    be.add_argument("--patterns", required=True)
    be.add_argument("--repeat", type=int, default=3)
    be.add_argument("--mode", choices=["batch", "scalar"], default="batch")
    be.add_argument("--text", help="source text; enables the naive-scan checksum check")
    be.add_argument("--corpus")
    be.add_argument("--report")
    be.set_defaults(func=cmd_bench)

    s = sub.add_parser("selftest", help="oracle equivalence on built-in corpora")
    s.set_defaults(func=cmd_selftest)
    return ap


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fmdummy: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TextError, ExtractionError, IndexFormatError, InvalidDNAPattern, OSError) as exc:
        print(f"fmdummy: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
