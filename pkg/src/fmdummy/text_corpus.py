"""Text ingestion and reproducible pattern extraction.

Patterns are drawn with SplitMix64 so that a given seed produces the same
pattern file on any platform:

    state = state + 0x9E3779B97F4A7C15            (mod 2**64)
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9      (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB      (mod 2**64)
    return z ^ (z >> 31)

A start position is ``next() % (n - m + 1)``.  Windows that contain a line
feed, or a non-ACGT byte when ``acgt_only`` is set, are rejected and redrawn.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, List

import numpy as np

MASK64 = (1 << 64) - 1
ACGT = b"ACGT"


class TextError(ValueError):
    """Raised when a text cannot be ingested."""


class ExtractionError(ValueError):
    """Raised when no admissible pattern window can be found."""


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        return self.next() % bound


@dataclass(frozen=True)
class Text:
    data: bytes
    alphabet: tuple = field(init=False)

    def __post_init__(self):
        if len(self.data) == 0:
            raise TextError("text must contain at least one symbol")
        counts = np.bincount(np.frombuffer(self.data, dtype=np.uint8), minlength=256)
        object.__setattr__(self, "alphabet", tuple(int(v) for v in np.flatnonzero(counts)))

    @property
    def n(self) -> int:
        return len(self.data)

    @property
    def sigma(self) -> int:
        return len(self.alphabet)

    def frequencies(self) -> np.ndarray:
        return np.bincount(np.frombuffer(self.data, dtype=np.uint8), minlength=256)


@dataclass
class PatternSet:
    patterns: List[bytes]
    source_length: int
    seed: int

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)


def load_text(path: str | os.PathLike) -> Text:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise TextError(f"cannot read {path}: {exc}") from exc
    if not data:
        raise TextError(f"{path} is empty")
    return Text(data)


def _window_ok(t: Text, m: int, acgt_only: bool) -> np.ndarray:
    """Boolean array over start positions: True where the window is admissible."""
    raw = np.frombuffer(t.data, dtype=np.uint8)
    bad = raw == 0x0A
    if acgt_only:
        bad |= ~np.isin(raw, np.frombuffer(ACGT, dtype=np.uint8))
    prefix = np.concatenate(([0], np.cumsum(bad, dtype=np.int64)))
    return (prefix[m:] - prefix[:-m]) == 0


def extract_patterns(t: Text, count: int, m: int, seed: int, acgt_only: bool = False) -> PatternSet:
    if count < 1 or m < 1:
        raise ValueError("count and m must be positive")
    if m > t.n:
        raise ExtractionError(f"pattern length {m} exceeds text length {t.n}")
    ok = _window_ok(t, m, acgt_only)
    if not ok.any():
        raise ExtractionError("text has no admissible window of the requested length")
    span = t.n - m + 1
    limit = t.n * 64
    rng = SplitMix64(seed)
    out = []
    for _ in range(count):
        for _attempt in range(limit):
            i = rng.below(span)
            if ok[i]:
                out.append(t.data[i:i + m])
                break
        else:
            raise ExtractionError(f"no admissible window after {limit} attempts")
    return PatternSet(out, t.n, seed)


def write_patterns(patterns: Iterable[bytes], path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        for p in patterns:
            if b"\n" in p:
                raise ValueError("patterns must not contain a line feed")
            fh.write(p + b"\n")


def read_patterns(path: str | os.PathLike) -> List[bytes]:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data:
        return []
    if data.endswith(b"\n"):
        data = data[:-1]
    return data.split(b"\n")
