"""Alphabets, bi-infinite sequence oracles, words, generators and SEQW files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import _kernels

SYMBOL_DTYPE = np.uint8
MAX_K = 255


class SequenceError(ValueError):
    """Base class for sequence-layer errors."""


class OutOfDomainError(SequenceError):
    """A partial (finite) source was asked for an index it does not store."""


class InvalidRangeError(SequenceError):
    pass


class SourceSpecError(SequenceError):
    """Malformed or out-of-range generator specification."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


@dataclass(frozen=True)
class Alphabet:
    k: int

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or not 2 <= self.k <= MAX_K:
            raise SequenceError(f"alphabet size must be an integer in [2, {MAX_K}], got {self.k!r}")

    def contains(self, s: int) -> bool:
        return 1 <= s <= self.k


@dataclass(frozen=True)
class Word:
    """A finite block of symbols placed at positions ``start .. start+len-1``."""

    start: int
    symbols: tuple[int, ...]

    def __post_init__(self):
        if len(self.symbols) < 1:
            raise SequenceError("a word has length >= 1")

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def end(self) -> int:
        return self.start + len(self.symbols) - 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.symbols, dtype=SYMBOL_DTYPE)

    def as_string(self) -> str:
        return symbol_string(self.symbols)

    @classmethod
    def from_array(cls, start: int, arr: np.ndarray) -> "Word":
        return cls(int(start), tuple(int(s) for s in arr))


@dataclass(frozen=True)
class CylinderSpec:
    """Sequences agreeing with ``word`` at the word's own positions."""

    word: Word

    @property
    def start(self) -> int:
        return self.word.start


def symbol_string(symbols) -> str:
    """Canonical text for a block: digits run together when k <= 9, else dot separated."""
    syms = [int(s) for s in symbols]
    if all(s <= 9 for s in syms):
        return "".join(map(str, syms))
    return ".".join(map(str, syms))


IndexFn = Callable[[np.ndarray], np.ndarray]


class BiSequence:
    """A pure oracle assigning a symbol in 1..k to every integer index.

    ``func`` takes an int64 index array and returns a same-shaped uint8 array.
    Evaluating the same index twice always gives the same symbol; nothing here
    mutates state after construction.
    """

    __slots__ = ("alphabet", "_func", "description")

    def __init__(self, alphabet: Alphabet | int, func: IndexFn, description: str):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(int(alphabet))
        self.alphabet = alphabet
        self._func = func
        self.description = description

    @property
    def k(self) -> int:
        return self.alphabet.k

    def __repr__(self) -> str:
        return f"BiSequence(k={self.k}, {self.description!r})"

    def take(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size == 0:
            return np.empty(idx.shape, dtype=SYMBOL_DTYPE)
        return np.asarray(self._func(idx), dtype=SYMBOL_DTYPE)

    def values(self, a: int, b: int) -> np.ndarray:
        """Symbols at a..b inclusive as a uint8 array."""
        if a > b:
            raise InvalidRangeError(f"empty range [{a}, {b}]")
        return self.take(np.arange(a, b + 1, dtype=np.int64))

    def __getitem__(self, n: int) -> int:
        return eval_at(self, n)


def eval_at(seq: BiSequence, n: int) -> int:
    return int(seq.take(np.array([n], dtype=np.int64))[0])


def window(seq: BiSequence, a: int, b: int) -> Word:
    if a > b:
        raise InvalidRangeError(f"window needs a <= b, got [{a}, {b}]")
    return Word.from_array(a, seq.values(a, b))


def shift(seq: BiSequence, t: int) -> BiSequence:
    """The sequence n -> seq[n + t]."""
    t = int(t)
    if t == 0:
        return seq
    f = seq._func
    return BiSequence(seq.alphabet, lambda idx: f(idx + t), f"shift({seq.description}, {t})")


# ---------------------------------------------------------------------------
# generators

def constant(k: int, s: int) -> BiSequence:
    alphabet = Alphabet(k)
    if not alphabet.contains(s):
        raise SourceSpecError(f"symbol {s} outside 1..{k}")
    sym = SYMBOL_DTYPE(s)
    return BiSequence(alphabet, lambda idx: np.full(idx.shape, sym, dtype=SYMBOL_DTYPE), f"constant:{s}")


def periodic(k: int, symbols: Sequence[int]) -> BiSequence:
    """Repeat ``symbols`` with ``symbols[0]`` sitting at index 0."""
    alphabet = Alphabet(k)
    if len(symbols) == 0:
        raise SourceSpecError("periodic word must be non-empty")
    for s in symbols:
        if not alphabet.contains(s):
            raise SourceSpecError(f"symbol {s} outside 1..{k}")
    word = np.asarray(symbols, dtype=SYMBOL_DTYPE)
    p = word.size
    desc = "periodic:" + ",".join(str(int(s)) for s in symbols)
    return BiSequence(alphabet, lambda idx: word[idx % p], desc)


def bernoulli(k: int, seed: int) -> BiSequence:
    """Uniform i.i.d.-looking symbols, random access via a keyed hash of (seed, n)."""
    alphabet = Alphabet(k)
    if not 0 <= seed < 2 ** 64:
        raise SourceSpecError(f"seed must fit in u64, got {seed}")
    key = _kernels.splitmix64(seed)
    return BiSequence(alphabet, lambda idx: _kernels.prf_symbols(idx.ravel(), key, k).reshape(idx.shape),
                      f"bernoulli:seed={seed}")


def from_window(k: int, start: int, symbols: Sequence[int] | np.ndarray, description: str | None = None) -> BiSequence:
    """A partial source holding ``symbols`` at ``start..``; other indices raise."""
    alphabet = Alphabet(k)
    data = np.asarray(symbols, dtype=np.int64)
    if data.size == 0:
        raise SequenceError("window source needs at least one symbol")
    if data.min() < 1 or data.max() > k:
        raise SourceSpecError(f"window symbols must lie in 1..{k}")
    data = data.astype(SYMBOL_DTYPE)
    lo, hi = int(start), int(start) + data.size - 1

    def func(idx):
        if idx.min() < lo or idx.max() > hi:
            bad = idx[(idx < lo) | (idx > hi)].flat[0]
            raise OutOfDomainError(f"index {int(bad)} outside stored range [{lo}, {hi}]")
        return data[idx - lo]

    return BiSequence(alphabet, func, description or f"window[{lo},{hi}]")


def flip_symbol(seq: BiSequence, n: int) -> BiSequence:
    """Copy of ``seq`` with the symbol at ``n`` replaced by the next symbol mod k."""
    f, k, n = seq._func, seq.k, int(n)

    def func(idx):
        out = np.array(f(idx), dtype=SYMBOL_DTYPE)
        hit = idx == n
        out[hit] = out[hit] % k + 1
        return out

    return BiSequence(seq.alphabet, func, f"flip({seq.description}, {n})")


# ---------------------------------------------------------------------------
# source-spec grammar

_SPEC_RE = re.compile(r"(?P<name>[a-z]+):(?P<arg>.*)\Z", re.S)
_INT_LIST_RE = re.compile(r"[0-9]+(,[0-9]+)*\Z")
_SEED_RE = re.compile(r"seed=([0-9]+)\Z")


def parse_source_spec(spec: str, k: int, default_seed: int | None = None) -> BiSequence:
    """Build a generator from ``periodic:..``, ``constant:..``, ``bernoulli:seed=..`` or ``file:..``.

    A bare ``bernoulli`` is accepted only when ``default_seed`` is given.
    """
    Alphabet(k)
    if not isinstance(spec, str) or not spec:
        raise SourceSpecError("empty source spec", 0)
    if spec == "bernoulli" and default_seed is not None:
        return bernoulli(k, default_seed)
    if not spec.isascii():
        bad = next(i for i, ch in enumerate(spec) if not ch.isascii())
        raise SourceSpecError("non-ASCII character in source spec", bad)
    m = _SPEC_RE.match(spec)
    if m is None:
        colon = spec.find(":")
        raise SourceSpecError("expected '<generator>:<argument>'", colon if colon >= 0 else len(spec))
    name, arg = m.group("name"), m.group("arg")
    arg_pos = m.start("arg")

    if name in ("periodic", "constant"):
        if not _INT_LIST_RE.match(arg):
            raise SourceSpecError(f"{name} expects comma-separated positive integers", arg_pos + _first_bad(arg))
        values = [int(v) for v in arg.split(",")]
        if name == "constant":
            if len(values) != 1:
                raise SourceSpecError("constant takes exactly one symbol", arg_pos + arg.index(","))
            return constant(k, values[0])
        return periodic(k, values)
    if name == "bernoulli":
        sm = _SEED_RE.match(arg)
        if sm is None:
            raise SourceSpecError("bernoulli expects 'seed=<u64>'", arg_pos)
        return bernoulli(k, int(sm.group(1)))
    if name == "file":
        if not arg:
            raise SourceSpecError("file expects a path", arg_pos)
        seq = read_seqw(arg)
        if seq.k != k:
            raise SourceSpecError(f"file alphabet k={seq.k} does not match k={k}", arg_pos)
        return seq
    raise SourceSpecError(f"unknown generator {name!r}", 0)


def _first_bad(arg: str) -> int:
    for i, ch in enumerate(arg):
        if not (ch.isdigit() or ch == ","):
            return i
    # structural problem such as a leading, trailing or doubled comma
    if not arg or arg[0] == ",":
        return 0
    dbl = arg.find(",,")
    return dbl + 1 if dbl >= 0 else len(arg) - 1


# ---------------------------------------------------------------------------
# SEQW files

_SEQW_HEADER = re.compile(r"SEQW v1 k=([0-9]+) start=(-?[0-9]+) len=([0-9]+)\Z")


def format_seqw(k: int, start: int, symbols) -> str:
    syms = [int(s) for s in symbols]
    return f"SEQW v1 k={k} start={start} len={len(syms)}\n" + " ".join(map(str, syms)) + "\n"


def write_seqw(path: str | Path, seq: BiSequence, a: int, b: int) -> None:
    Path(path).write_text(format_seqw(seq.k, a, seq.values(a, b)), encoding="ascii")


def parse_seqw(text: str, description: str = "seqw") -> BiSequence:
    lines = text.split("\n")
    if len(lines) < 2 or lines[-1] != "" or len(lines) != 3:
        raise SourceSpecError("SEQW needs exactly a header line and a symbol line, newline-terminated")
    m = _SEQW_HEADER.match(lines[0])
    if m is None:
        raise SourceSpecError("bad SEQW header", 0)
    k, start, n = int(m.group(1)), int(m.group(2)), int(m.group(3))
    parts = lines[1].split(" ") if lines[1] else []
    if len(parts) != n:
        raise SourceSpecError(f"SEQW header says len={n} but found {len(parts)} symbols")
    try:
        symbols = [int(p) for p in parts]
    except ValueError as exc:
        raise SourceSpecError(f"non-integer symbol in SEQW body: {exc}") from None
    return from_window(k, start, symbols, description)


def read_seqw(path: str | Path) -> BiSequence:
    try:
        text = Path(path).read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as exc:
        raise SourceSpecError(f"cannot read SEQW file {path}: {exc}") from None
    return parse_seqw(text, f"file:{path}")
