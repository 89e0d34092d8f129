"""Windowed word counting, entropy estimates and the word-complexity inequality chain."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import _kernels
from .report import CheckResult
from .seq import BiSequence, symbol_string


class ComplexityError(ValueError):
    pass


@dataclass(frozen=True)
class WordSet:
    """Distinct words of one length, compared by content only."""

    length: int
    words: frozenset[bytes]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, w) -> bool:
        if isinstance(w, (bytes, bytearray)):
            return bytes(w) in self.words
        return np.asarray(w, dtype=np.uint8).tobytes() in self.words

    def issubset(self, other: "WordSet") -> bool:
        return self.words <= other.words

    def strings(self) -> list[str]:
        return sorted(symbol_string(w) for w in self.words)

    def to_lines(self) -> str:
        return "".join(s + "\n" for s in self.strings())


def _rows_to_set(rows: np.ndarray) -> frozenset[bytes]:
    if rows.shape[0] == 0:
        return frozenset()
    rows = np.ascontiguousarray(rows, dtype=np.uint8)
    return frozenset(r.tobytes() for r in np.unique(rows, axis=0))


def _codes_fit(k: int, n: int) -> bool:
    return n * math.log2(k) < 62


def blocks_in(seq: BiSequence, n: int, lo: int, hi: int) -> WordSet:
    """n-words of ``seq`` lying entirely inside [lo, hi]."""
    if n < 1 or hi - lo + 1 < n:
        raise ComplexityError(f"no room for {n}-words in [{lo}, {hi}]")
    vals = seq.values(lo, hi)
    return WordSet(n, _rows_to_set(sliding_window_view(vals, n)))


def block_count_in(seq: BiSequence, n: int, lo: int, hi: int) -> int:
    if n < 1 or hi - lo + 1 < n:
        raise ComplexityError(f"no room for {n}-words in [{lo}, {hi}]")
    if _codes_fit(seq.k, n):
        codes = _kernels.window_codes(seq.values(lo, hi), n, seq.k)
        return int(np.unique(codes).size)
    return len(blocks_in(seq, n, lo, hi))


def blocks(seq: BiSequence, n: int, N: int) -> WordSet:
    """Distinct n-words read at starts -N .. N-n+1."""
    if not 1 <= n <= 2 * N + 1:
        raise ComplexityError(f"need 1 <= n <= 2N+1, got n={n}, N={N}")
    return blocks_in(seq, n, -N, N)


def block_count(seq: BiSequence, n: int, N: int) -> int:
    if not 1 <= n <= 2 * N + 1:
        raise ComplexityError(f"need 1 <= n <= 2N+1, got n={n}, N={N}")
    return block_count_in(seq, n, -N, N)


def aligned_starts(l: int, N: int) -> np.ndarray:
    """Multiples r*l with [r*l, r*l + l - 1] inside [-N, N]."""
    r_lo = -(N // l)
    r_hi = (N - l + 1) // l
    return np.arange(r_lo, r_hi + 1, dtype=np.int64) * l


def _aligned_rows(seq: BiSequence, l: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    starts = aligned_starts(l, N)
    vals = seq.values(-N, N)
    rows = vals[(starts + N)[:, None] + np.arange(l, dtype=np.int64)[None, :]]
    return starts, rows


def aligned_words(seq: BiSequence, l: int, N: int) -> WordSet:
    """Distinct l-words read at the grid positions r*l inside [-N, N]."""
    if l < 1 or N < l:
        raise ComplexityError(f"need l >= 1 and N >= l, got l={l}, N={N}")
    _, rows = _aligned_rows(seq, l, N)
    return WordSet(l, _rows_to_set(rows))


@dataclass(frozen=True)
class EntropyProfile:
    description: str
    N: int
    rows: tuple[tuple[int, int, float], ...]
    log_base: str = "e"

    @property
    def estimate(self) -> float:
        return self.rows[-1][2]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "count", "log_count_over_n"])
        for n, c, h in self.rows:
            w.writerow([n, c, repr(h)])
        return buf.getvalue()


def entropy_estimate(seq: BiSequence, n_max: int, N: int) -> EntropyProfile:
    """(n, #B_n, log(#B_n)/n) for n = 1..n_max over the window [-N, N]; natural log."""
    if not 1 <= n_max <= 2 * N + 1:
        raise ComplexityError(f"need 1 <= n_max <= 2N+1, got n_max={n_max}, N={N}")
    rows = []
    for n in range(1, n_max + 1):
        c = block_count(seq, n, N)
        rows.append((n, c, math.log(c) / n))
    return EntropyProfile(seq.description, N, tuple(rows))


@dataclass(frozen=True)
class ComplexityProfile:
    description: str
    N: int
    blocks: dict[int, WordSet] = field(default_factory=dict)
    aligned: dict[int, WordSet] = field(default_factory=dict)


def complexity_profile(seq: BiSequence, N: int, lengths=(), stage_lengths: dict[int, int] | None = None) -> ComplexityProfile:
    return ComplexityProfile(
        seq.description, N,
        {n: blocks(seq, n, N) for n in lengths},
        {M: aligned_words(seq, l, N) for M, l in (stage_lengths or {}).items()},
    )


def verify_complexity_chain(a: BiSequence, trace, N: int) -> list[CheckResult]:
    """Windowed forms of the word-count inequalities behind the entropy bound.

    c1: #W_M shrinks along a, a^(1), ..., a^(M) (each stage maps aligned words to aligned words).
    c2: W_M(b) on [-N, N] is contained in W_M(a^(M)) on [-N', N'], N' = max(N, l_max).
    c3: #B_{l_M}(b) over the interior [-N+l_M, N-l_M] <= (l_M+1) * #W_M(b)^2.
    """
    stages = trace.stages
    l_max = stages[-1].l
    if N < l_max or aligned_starts(l_max, N).size < 3:
        raise ComplexityError(f"N={N} too small: need N >= {l_max} and at least 3 aligned blocks of length {l_max}")
    b = trace.b
    N_wide = max(N, l_max)
    checks = []
    for p in stages:
        M, l = p.M, p.l
        counts = [len(aligned_words(trace.sequences[j], l, N)) for j in range(M, -1, -1)]
        broken = next((i for i in range(len(counts) - 1) if counts[i] > counts[i + 1]), None)
        checks.append(CheckResult(
            f"c1_{M}", broken is None,
            witness=None if broken is None else {"stage": M - broken, "count": counts[broken],
                                                 "next_count": counts[broken + 1]},
            detail={"counts_from_stage_M_down_to_input": counts}))

        target = aligned_words(trace.sequences[M], l, N_wide)
        starts, rows = _aligned_rows(b, l, N)
        witness = None
        for s, row in zip(starts.tolist(), rows):
            if row.tobytes() not in target.words:
                witness = {"start": s, "word": symbol_string(row)}
                break
        checks.append(CheckResult(f"c2_{M}", witness is None, witness=witness,
                                  detail={"W_b": len(_rows_to_set(rows)), "W_aM_wide": len(target),
                                          "N_wide": N_wide}))

        w_b = len(aligned_words(b, l, N))
        interior = block_count_in(b, l, -N + l, N - l)
        bound = (l + 1) * w_b * w_b
        full_b = block_count(b, l, N)
        full_a = block_count(a, l, N)
        ratio = None if full_a <= 1 else math.log(full_b) / math.log(full_a)
        checks.append(CheckResult(
            f"c3_{M}", interior <= bound,
            witness=None if interior <= bound else {"B_interior": interior, "bound": bound},
            detail={"B_b_interior": interior, "W_b": w_b, "bound": bound,
                    "B_b_full": full_b, "B_a_full": full_a, "log_ratio_b_over_a": ratio}))
    return checks
