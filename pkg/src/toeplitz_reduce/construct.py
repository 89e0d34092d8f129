"""Stagewise overwrite turning an arbitrary sequence into a nearby Toeplitz sequence.

Stage 1 writes a[0] on every multiple of l_1. Stage M >= 2 copies the central
block ``a^(M-1)[-l_{M-1}, l_{M-1}-1]`` onto every block centred at a multiple
of l_M. The limit ``b`` is realised with finitely many stages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import _kernels
from .metrics import centered_abs_diff_sums, log_checkpoints
from .report import CheckResult, rational_str
from .seq import SYMBOL_DTYPE, Alphabet, BiSequence, Word, eval_at, window


class ScheduleError(ValueError):
    """A stage parameter list violates one of the construction's inequalities."""


class ConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class StageParams:
    M: int
    epsilon: Fraction
    l: int
    l_prev: int
    varpi: Word

    @property
    def block_shift(self) -> int:
        """Distance from a multiple of l back to the start of its block."""
        return 0 if self.M == 1 else self.l_prev

    @property
    def block_width(self) -> int:
        return 1 if self.M == 1 else 2 * self.l_prev

    def density_bound(self, k: int) -> Fraction:
        if self.M == 1:
            return Fraction(k, self.l)
        return Fraction(2 * k * self.l_prev, self.l)


def schedule(epsilon: Fraction, alphabet: Alphabet | int, max_stage: int,
             l_overrides: Mapping[int, int] | None = None,
             epsilon_overrides: Mapping[int, Fraction] | None = None) -> list[tuple[Fraction, int]]:
    """Per-stage (epsilon_M, l_M).

    Defaults: epsilon_M = epsilon / 3**M and l_M minimal under the stage
    constraints. Overrides are validated against the same constraints.
    """
    k = alphabet.k if isinstance(alphabet, Alphabet) else Alphabet(int(alphabet)).k
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ScheduleError(f"epsilon must be positive, got {rational_str(epsilon)}")
    if max_stage < 1:
        raise ScheduleError(f"max_stage must be >= 1, got {max_stage}")
    l_overrides = dict(l_overrides or {})
    epsilon_overrides = {m: Fraction(v) for m, v in (epsilon_overrides or {}).items()}
    for m in set(l_overrides) | set(epsilon_overrides):
        if not 1 <= m <= max_stage:
            raise ScheduleError(f"override for stage {m} outside 1..{max_stage}")

    out: list[tuple[Fraction, int]] = []
    eps_prev, l_prev = epsilon, 1
    for M in range(1, max_stage + 1):
        eps_M = epsilon_overrides.get(M, epsilon / 3 ** M)
        if eps_M <= 0:
            raise ScheduleError(f"stage {M}: epsilon_{M} > 0 violated ({rational_str(eps_M)})")
        if not eps_M < eps_prev / 2:
            raise ScheduleError(
                f"stage {M}: epsilon_{M} < epsilon_{M - 1}/2 violated "
                f"({rational_str(eps_M)} >= {rational_str(eps_prev / 2)})")
        if M == 1:
            l_M = l_overrides.get(M, math.ceil(Fraction(k) / eps_M))
            if l_M < 1:
                raise ScheduleError(f"stage 1: l_1 >= 1 violated (l_1={l_M})")
            if not Fraction(k, l_M) <= eps_M:
                raise ScheduleError(
                    f"stage 1: k/l_1 <= epsilon_1 violated ({k}/{l_M} > {rational_str(eps_M)})")
        else:
            # blocks of width 2*l_{M-1} must not overlap, hence the factor of at least 2
            l_M = l_overrides.get(M, l_prev * max(2, math.ceil(Fraction(2 * k) / eps_M)))
            if l_M < 1 or l_M % l_prev != 0:
                raise ScheduleError(f"stage {M}: l_{M - 1} | l_{M} violated ({l_prev} does not divide {l_M})")
            if l_M < 2 * l_prev:
                raise ScheduleError(f"stage {M}: l_{M} >= 2*l_{M - 1} violated ({l_M} < {2 * l_prev})")
            if not Fraction(2 * k * l_prev, l_M) <= eps_M:
                raise ScheduleError(
                    f"stage {M}: 2k*l_{M - 1}/l_{M} <= epsilon_{M} violated "
                    f"({2 * k * l_prev}/{l_M} > {rational_str(eps_M)})")
        out.append((eps_M, int(l_M)))
        eps_prev, l_prev = eps_M, int(l_M)
    return out


def stage_step(prev: BiSequence, params: StageParams) -> BiSequence:
    """Overwrite ``prev`` with ``params.varpi`` on every block of stage M."""
    varpi = params.varpi.as_array()
    if varpi.size != params.block_width:
        raise ConstructionError(f"varpi for stage {params.M} has length {varpi.size}, expected {params.block_width}")
    l, sh, w = params.l, params.block_shift, params.block_width

    def func(idx):
        flat = idx.ravel()
        off = _kernels.block_offsets(flat, l, sh, w)
        inside = off >= 0
        out = np.empty(flat.size, dtype=SYMBOL_DTYPE)
        out[inside] = varpi[off[inside]]
        rest = ~inside
        if rest.any():
            out[rest] = prev.take(flat[rest])
        return out.reshape(idx.shape)

    return BiSequence(prev.alphabet, func, f"stage{params.M}({prev.description})")


def last_writer(idx: np.ndarray, stages) -> tuple[np.ndarray, np.ndarray]:
    """(stage, offset) of the last stage among ``stages`` whose blocks cover each index; stage 0 = untouched."""
    idx = np.asarray(idx, dtype=np.int64)
    stage = np.zeros(idx.size, dtype=np.int64)
    offset = np.full(idx.size, -1, dtype=np.int64)
    for p in stages:
        off = _kernels.block_offsets(idx, p.l, p.block_shift, p.block_width)
        hit = off >= 0
        stage[hit] = p.M
        offset[hit] = off[hit]
    return stage, offset


@dataclass
class ConstructionTrace:
    input: BiSequence
    epsilon: Fraction
    stages: list[StageParams]
    sequences: list[BiSequence]  # a^(0) = input, a^(1), ..., a^(max_stage)
    b: BiSequence
    window_start: int
    window_len: int
    provenance_stage: np.ndarray = field(repr=False)
    provenance_offset: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return self.input.k

    @property
    def max_stage(self) -> int:
        return len(self.stages)

    def stage_sequence(self, M: int) -> BiSequence:
        return self.sequences[M]

    def with_b(self, b: BiSequence) -> "ConstructionTrace":
        """Same trace with ``b`` swapped out, for fault injection."""
        return replace(self, b=b)

    def with_stage_sequence(self, M: int, seq: BiSequence) -> "ConstructionTrace":
        seqs = list(self.sequences)
        seqs[M] = seq
        return replace(self, sequences=seqs)

    def provenance(self) -> list:
        out = []
        for st, off in zip(self.provenance_stage.tolist(), self.provenance_offset.tolist()):
            out.append("original" if st == 0 else [st, off])
        return out

    def to_json(self) -> dict:
        return {
            "epsilon": rational_str(self.epsilon),
            "stages": [stage_json(p) for p in self.stages],
            "window": {"start": self.window_start, "len": self.window_len},
            "provenance": self.provenance(),
        }


def stage_json(p: StageParams) -> dict:
    return {"M": p.M, "epsilon": rational_str(p.epsilon), "l": p.l,
            "varpi_start": p.varpi.start, "varpi": list(p.varpi.symbols)}


def _limit_sequence(stages: list[StageParams], sequences: list[BiSequence]) -> BiSequence:
    # b_n = a^(M)_n for the least M with |n| <= l_{M-1} - 1, else a^(max_stage)_n
    radii = np.array([p.l_prev - 1 for p in stages], dtype=np.int64)
    max_stage = len(stages)

    def func(idx):
        flat = idx.ravel()
        level = np.searchsorted(radii, np.abs(flat), side="left") + 1
        level = np.minimum(level, max_stage)
        out = np.empty(flat.size, dtype=SYMBOL_DTYPE)
        for M in np.unique(level).tolist():
            sel = level == M
            out[sel] = sequences[M].take(flat[sel])
        return out.reshape(idx.shape)

    return BiSequence(sequences[0].alphabet, func, f"toeplitz({sequences[0].description})")


def build(a: BiSequence, epsilon: Fraction, max_stage: int,
          l_overrides: Mapping[int, int] | None = None,
          epsilon_overrides: Mapping[int, Fraction] | None = None,
          window_range: tuple[int, int] | None = None) -> tuple[BiSequence, ConstructionTrace]:
    """Run ``max_stage`` stages on ``a`` and return the truncated limit ``b`` with its trace.

    ``window_range`` (inclusive) selects where provenance is stored; by default
    it is the stabilized central block [-l_{max-1}, l_{max-1} - 1].
    """
    epsilon = Fraction(epsilon)
    sched = schedule(epsilon, a.alphabet, max_stage, l_overrides, epsilon_overrides)
    stages: list[StageParams] = []
    sequences = [a]
    l_prev = 1
    for M, (eps_M, l_M) in enumerate(sched, start=1):
        prev = sequences[-1]
        if M == 1:
            varpi = Word(0, (eval_at(a, 0),))
        else:
            varpi = window(prev, -l_prev, l_prev - 1)
        p = StageParams(M, eps_M, l_M, l_prev, varpi)
        stages.append(p)
        sequences.append(stage_step(prev, p))
        l_prev = l_M

    b = _limit_sequence(stages, sequences)
    if window_range is None:
        lp = stages[-1].l_prev
        window_range = (-lp, lp - 1) if max_stage > 1 else (0, 0)
    w0, w1 = window_range
    if w0 > w1:
        raise ConstructionError(f"empty provenance window [{w0}, {w1}]")
    st, off = last_writer(np.arange(w0, w1 + 1, dtype=np.int64), stages)
    trace = ConstructionTrace(a, epsilon, stages, sequences, b, w0, w1 - w0 + 1, st, off)
    return b, trace


@dataclass(frozen=True)
class ProvenanceLink:
    stage: int
    index: int
    offset: int
    source_index: int


@dataclass(frozen=True)
class ProvenanceChain:
    n: int
    links: tuple[ProvenanceLink, ...]
    origin: int
    value: int


def provenance_at(trace: ConstructionTrace, n: int) -> ProvenanceChain:
    """Follow b_n back through the stages that copied it, down to an index of the input."""
    lo, hi = trace.window_start, trace.window_start + trace.window_len - 1
    if not lo <= n <= hi:
        raise ConstructionError(f"index {n} outside the stored provenance window [{lo}, {hi}]")
    links = []
    pos, level = int(n), trace.max_stage
    while True:
        st, off = last_writer(np.array([pos]), trace.stages[:level])
        st, off = int(st[0]), int(off[0])
        if st == 0:
            break
        p = trace.stages[st - 1]
        src = 0 if st == 1 else off - p.l_prev
        links.append(ProvenanceLink(st, pos, off, src))
        pos, level = src, st - 1
    return ProvenanceChain(int(n), tuple(links), pos, eval_at(trace.input, pos))


# ---------------------------------------------------------------------------
# exact checks of the per-stage properties

def _check_windowed(N: int, trace: ConstructionTrace):
    l_max = trace.stages[-1].l
    if N < l_max:
        raise ConstructionError(f"N must be >= l_max = {l_max}, got {N}")


def check_block_periodicity(seq: BiSequence, p: StageParams, N: int, name: str | None = None) -> CheckResult:
    """Every stage-M block lying inside [-N, N] carries varpi^(M)."""
    vals = seq.values(-N, N)
    h, w, l = p.block_shift, p.block_width, p.l
    r_lo = -((N - h) // l)
    r_hi = (N + h - w + 1) // l
    rs = np.arange(r_lo, r_hi + 1, dtype=np.int64)
    pos = (rs * l - h)[:, None] + np.arange(w, dtype=np.int64)[None, :]
    bad = vals[pos + N] != p.varpi.as_array()[None, :]
    name = name or f"I_{p.M}"
    detail = {"blocks_checked": int(rs.size), "period": l}
    if not bad.any():
        return CheckResult(name, True, detail=detail)
    flat = np.flatnonzero(bad.ravel())
    first = int(pos.ravel()[flat].min())
    r = (first + h) // l
    return CheckResult(name, False, witness={"index": first, "r": r,
                                             "expected": int(p.varpi.symbols[(first + h) % l]),
                                             "found": int(vals[first + N])}, detail=detail)


def check_density(trace: ConstructionTrace, p: StageParams, N: int) -> CheckResult:
    """Difference density between consecutive stages against 2k*l_{M-1}/l_M (k/l_1 at stage 1).

    Violations at radii below l_M are flagged rather than failed.
    """
    cur = trace.sequences[p.M].values(-N, N)
    prev = trace.sequences[p.M - 1].values(-N, N)
    radii = log_checkpoints(N)
    sums = centered_abs_diff_sums(cur, prev, N, radii)
    bound = p.density_bound(trace.k)
    failed, flagged = [], []
    per_radius = []
    for r, s in zip(radii, sums):
        dens = Fraction(s, 2 * r + 1)
        ok = dens <= bound
        per_radius.append({"N": r, "density": dens, "ok": ok})
        if not ok:
            (failed if r >= p.l else flagged).append(r)
    witness = None
    if failed:
        witness = {"N": failed[0]}
    elif flagged:
        witness = {"N": flagged[0], "note": "violation below l_M only"}
    return CheckResult(f"II_{p.M}", not failed, flagged=bool(flagged) and not failed, witness=witness,
                       detail={"bound": bound, "checkpoints": per_radius})


def check_central(trace: ConstructionTrace, p: StageParams) -> CheckResult:
    seq = trace.sequences[p.M]
    got = seq.values(p.varpi.start, p.varpi.end)
    want = p.varpi.as_array()
    bad = np.flatnonzero(got != want)
    if bad.size == 0:
        return CheckResult(f"III_{p.M}", True)
    i = int(bad[0])
    return CheckResult(f"III_{p.M}", False, witness={"index": p.varpi.start + i, "expected": int(want[i]),
                                                     "found": int(got[i])})


def verify_stage_properties(trace: ConstructionTrace, N: int) -> list[CheckResult]:
    """Per stage: block periodicity on a^(M) and on b, density bound, central-window equality."""
    _check_windowed(N, trace)
    checks = []
    for p in trace.stages:
        checks.append(check_block_periodicity(trace.sequences[p.M], p, N))
        checks.append(check_block_periodicity(trace.b, p, N, name=f"I_{p.M}[b]"))
        checks.append(check_density(trace, p, N))
        checks.append(check_central(trace, p))
    return checks


def check_stabilization(trace: ConstructionTrace) -> list[CheckResult]:
    """a^(M') and b agree with a^(M) on [-l_{M-1}, l_{M-1} - 1] for every M' > M."""
    checks = []
    for p in trace.stages:
        a0, a1 = p.varpi.start, p.varpi.end
        ref = trace.sequences[p.M].values(a0, a1)
        others = [(f"a^({m})", trace.sequences[m]) for m in range(p.M + 1, trace.max_stage + 1)]
        others.append(("b", trace.b))
        witness = None
        for label, seq in others:
            bad = np.flatnonzero(seq.values(a0, a1) != ref)
            if bad.size:
                witness = {"sequence": label, "index": a0 + int(bad[0])}
                break
        checks.append(CheckResult(f"IV_{p.M}", witness is None, witness=witness,
                                  detail={"window": [a0, a1]}))
    return checks
