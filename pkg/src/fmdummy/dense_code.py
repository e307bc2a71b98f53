"""Dense digit codes applied to a text before the BWT.

Two families are supported:

* SCBDC, the (s,c,b,o) code on nybbles.  A codeword is either a single
  one-length digit, or a beginner, zero or more continuers and a stopper.
  It is prefix-free and suffix-free.
* CB, beginners followed by continuers, on nybbles or 3-bit digits.  It is
  suffix-free but not prefix-free.

Digit values are handed out to the classes in the order beginners,
one-length, stoppers, continuers, so beginners always own the lowest values.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np

SCBDC = "scbdc"
CB = "cb"
MAX_CODE_LENGTH = 16


class DenseCodeError(ValueError):
    pass


@dataclass(frozen=True)
class DenseCodeParams:
    family: str
    s: int = 0
    c: int = 0
    b: int = 0
    o: int = 0
    digit_bits: int = 4

    def __post_init__(self):
        if min(self.s, self.c, self.b, self.o) < 0:
            raise DenseCodeError("digit-class sizes must be non-negative")
        if self.b < 1:
            raise DenseCodeError("at least one beginner digit is required")
        if self.family == SCBDC:
            if self.digit_bits != 4:
                raise DenseCodeError("the (s,c,b,o) code is defined on nybbles only")
            if self.s < 1:
                raise DenseCodeError("at least one stopper digit is required")
        elif self.family == CB:
            if self.digit_bits not in (3, 4):
                raise DenseCodeError("digit_bits must be 3 or 4")
            if self.s or self.o:
                raise DenseCodeError("the (c,b) code has no stoppers or one-length digits")
        else:
            raise DenseCodeError(f"unknown code family {self.family!r}")
        if self.s + self.c + self.b + self.o != self.radix:
            raise DenseCodeError(f"class sizes must sum to {self.radix}")

    @classmethod
    def scbdc(cls, s: int, c: int, b: int, o: int) -> "DenseCodeParams":
        return cls(SCBDC, s=s, c=c, b=b, o=o, digit_bits=4)

    @classmethod
    def cb(cls, b: int, digit_bits: int = 4) -> "DenseCodeParams":
        return cls(CB, c=(1 << digit_bits) - b, b=b, digit_bits=digit_bits)

    @property
    def radix(self) -> int:
        return 1 << self.digit_bits

    @property
    def beginners(self) -> range:
        return range(0, self.b)

    @property
    def one_length(self) -> range:
        return range(self.b, self.b + self.o)

    @property
    def stoppers(self) -> range:
        return range(self.b + self.o, self.b + self.o + self.s)

    @property
    def continuers(self) -> range:
        return range(self.b + self.o + self.s, self.radix)


def codeword_capacity(params: DenseCodeParams, j: int) -> int:
    """Number of distinct codewords of length at most ``j``."""
    if j < 1:
        raise ValueError("j must be at least 1")
    b, c, s = params.b, params.c, params.s
    if params.family == SCBDC:
        return params.o + sum(b * s * c ** i for i in range(j - 1))
    return sum(b * c ** i for i in range(j))


def codewords_of_length(params: DenseCodeParams, length: int) -> Iterator[Tuple[int, ...]]:
    """Codewords of exactly ``length`` digits in digit-lexicographic order."""
    if params.family == SCBDC:
        if length == 1:
            return ((d,) for d in params.one_length)
        parts = [params.beginners] + [params.continuers] * (length - 2) + [params.stoppers]
    else:
        parts = [params.beginners] + [params.continuers] * (length - 1)
    return itertools.product(*parts)


def _canonical_codewords(params: DenseCodeParams, count: int):
    out = []
    for length in range(1, MAX_CODE_LENGTH + 1):
        for cw in codewords_of_length(params, length):
            out.append(cw)
            if len(out) == count:
                return out
    raise DenseCodeError(
        f"{count} symbols exceed the capacity of {params} up to length {MAX_CODE_LENGTH}")


@dataclass
class DenseCode:
    params: DenseCodeParams
    symbols: Tuple[int, ...]                      # assignment order, most frequent first
    encode_map: Dict[int, Tuple[int, ...]] = field(init=False)
    decode_map: Dict[Tuple[int, ...], int] = field(init=False)

    def __post_init__(self):
        words = _canonical_codewords(self.params, len(self.symbols)) if self.symbols else []
        self.encode_map = dict(zip(self.symbols, words))
        self.decode_map = {w: s for s, w in self.encode_map.items()}
        domain = max(256, max(self.symbols, default=0) + 1)
        self._lengths = np.zeros(domain, dtype=np.int64)
        width = max((len(w) for w in words), default=1)
        self._table = np.zeros((domain, width), dtype=np.uint8)
        self._known = np.zeros(domain, dtype=bool)
        for sym, w in self.encode_map.items():
            self._lengths[sym] = len(w)
            self._table[sym, : len(w)] = w
            self._known[sym] = True

    @property
    def max_length(self) -> int:
        return self._table.shape[1]

    def digit_class(self, d: int) -> str:
        p = self.params
        for name, rng in (("beginner", p.beginners), ("one-length", p.one_length),
                          ("stopper", p.stoppers), ("continuer", p.continuers)):
            if d in rng:
                return name
        raise ValueError(f"digit {d} outside 0..{p.radix - 1}")

    def encode(self, symbols) -> np.ndarray:
        syms = np.frombuffer(bytes(symbols), dtype=np.uint8) if isinstance(symbols, (bytes, bytearray)) \
            else np.asarray(symbols, dtype=np.int64)
        if syms.size == 0:
            return np.zeros(0, dtype=np.uint8)
        if syms.min() < 0 or syms.max() >= len(self._known) or not self._known[syms].all():
            raise DenseCodeError("symbol without a codeword")
        lens = self._lengths[syms]
        keep = np.arange(self.max_length) < lens[:, None]
        return self._table[syms][keep]

    def decode(self, digits) -> bytes:
        p = self.params
        out = bytearray()
        cur: list = []
        beginners, continuers = p.beginners, p.continuers

        def flush():
            try:
                out.append(self.decode_map[tuple(cur)])
            except KeyError:
                raise DenseCodeError(f"unassigned codeword {tuple(cur)}") from None

        for d in (int(x) for x in digits):
            if p.family == SCBDC:
                if not cur:
                    if d in p.one_length:
                        cur.append(d)
                        flush()
                        cur = []
                    elif d in beginners:
                        cur.append(d)
                    else:
                        raise DenseCodeError(f"digit {d} cannot start a codeword")
                elif d in continuers:
                    cur.append(d)
                elif d in p.stoppers:
                    cur.append(d)
                    flush()
                    cur = []
                else:
                    raise DenseCodeError(f"digit {d} inside an unfinished codeword")
            else:
                if d in beginners:
                    if cur:
                        flush()
                    cur = [d]
                elif cur:
                    cur.append(d)
                else:
                    raise DenseCodeError("stream starts with a continuer")
        if cur:
            if p.family == SCBDC:
                raise DenseCodeError("stream ends inside a codeword")
            flush()
        return bytes(out)

    def mean_length(self, freqs) -> float:
        """Average codeword length in digits per source symbol, weighted by ``freqs``."""
        f = np.asarray(freqs, dtype=np.float64)
        return float((f * self._lengths[: len(f)]).sum() / f.sum())


def _freq_table(freqs) -> Dict[int, int]:
    if isinstance(freqs, dict):
        return {int(k): int(v) for k, v in freqs.items() if v > 0}
    arr = np.asarray(freqs)
    return {int(i): int(arr[i]) for i in np.flatnonzero(arr)}


def derive_code(freqs, params: DenseCodeParams) -> DenseCode:
    """Assign canonical codewords to symbols by descending frequency (ties: lower symbol first)."""
    table = _freq_table(freqs)
    order: Sequence[int] = tuple(sorted(table, key=lambda s: (-table[s], s)))
    return DenseCode(params, order)
