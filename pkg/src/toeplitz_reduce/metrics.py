"""Difference densities, windowed periodic parts, Toeplitz coverage and returning times."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .report import CheckResult
from .seq import BiSequence, CylinderSpec, SequenceError


class MetricsError(ValueError):
    pass


def log_checkpoints(N: int, start: int = 1) -> list[int]:
    """{1, 10, 100, ...} intersected with [start, N], plus N itself."""
    out = []
    c = 1
    while c <= N:
        if c >= start:
            out.append(c)
        c *= 10
    if N >= start and (not out or out[-1] != N):
        out.append(N)
    return out


def difference_density(x: BiSequence, y: BiSequence, N: int) -> Fraction:
    """(1/(2N+1)) * sum_{|n|<=N} |x_n - y_n|, exactly."""
    if x.k != y.k:
        raise SequenceError(f"alphabet mismatch: k={x.k} vs k={y.k}")
    if N < 0:
        raise MetricsError("N must be >= 0")
    xv = x.values(-N, N).astype(np.int64)
    yv = y.values(-N, N).astype(np.int64)
    return Fraction(int(np.abs(xv - yv).sum()), 2 * N + 1)


def centered_abs_diff_sums(xv: np.ndarray, yv: np.ndarray, N: int, radii) -> list[int]:
    """sum_{|n|<=r} |x_n - y_n| for each r, from values stored on [-N, N]."""
    d = np.abs(xv.astype(np.int64) - yv.astype(np.int64))
    c = np.concatenate([[0], np.cumsum(d)])
    return [int(c[N + r + 1] - c[N - r]) for r in radii]


def periodic_positions(x: BiSequence, p: int, N: int) -> np.ndarray:
    """Indices n in [-N, N] with x[n + j*p] == x[n] for every j keeping n + j*p in [-N, N].

    Membership is relative to the window: it says nothing about indices outside it.
    """
    if p < 1 or N < p:
        raise MetricsError(f"need p >= 1 and N >= p, got p={p}, N={N}")
    vals = x.values(-N, N)
    L = vals.size
    rows = -(-L // p)
    pad = np.full(rows * p, 0, dtype=np.int16)
    pad[:L] = vals
    grid = pad.reshape(rows, p)
    # the last row is only partially inside the window
    filled = np.zeros(rows * p, dtype=np.bool_)
    filled[:L] = True
    filled = filled.reshape(rows, p)
    first = grid[0]
    constant_class = np.all((grid == first) | ~filled, axis=0)
    keep = constant_class[np.arange(L) % p]
    return np.flatnonzero(keep).astype(np.int64) - N


@dataclass(frozen=True)
class CoverageReport:
    region: tuple[int, int]
    covering_stage: dict[int, int | None]
    fraction: Fraction

    @property
    def uncovered(self) -> list[int]:
        return [n for n, m in self.covering_stage.items() if m is None]

    def check(self) -> CheckResult:
        unc = self.uncovered
        return CheckResult(
            "toeplitz_coverage",
            passed=self.fraction == 1,
            witness=None if not unc else {"index": unc[0]},
            detail={"fraction": self.fraction, "region": list(self.region),
                    "note": "window-relative periodicity on the stabilized region"},
        )


def toeplitz_coverage(b: BiSequence, trace, N: int) -> CoverageReport:
    """Least stage M with n in periodic_positions(b, l_M, N), for |n| <= l_{max-1} - 1."""
    stages = trace.stages
    l_max = stages[-1].l
    if N < l_max:
        raise MetricsError(f"toeplitz_coverage needs N >= l_max = {l_max}, got {N}")
    radius = stages[-1].l_prev - 1
    region = list(range(-radius, radius + 1))
    periodic_sets = [set(periodic_positions(b, p.l, N).tolist()) for p in stages]
    covering: dict[int, int | None] = {}
    for n in region:
        covering[n] = next((p.M for p, s in zip(stages, periodic_sets) if n in s), None)
    hit = sum(1 for m in covering.values() if m is not None)
    return CoverageReport((-radius, radius), covering, Fraction(hit, len(region)))


@dataclass(frozen=True)
class ReturningTimeSet:
    cylinder: CylinderSpec
    N: int
    times: np.ndarray

    def __contains__(self, t: int) -> bool:
        i = np.searchsorted(self.times, t)
        return bool(i < self.times.size and self.times[i] == t)

    def __len__(self) -> int:
        return int(self.times.size)


def returning_times(x: BiSequence, cyl: CylinderSpec, N: int) -> ReturningTimeSet:
    """All t in [-N, N] such that x read at cyl.start + t matches the cylinder word."""
    if N < 0:
        raise MetricsError("N must be >= 0")
    word = cyl.word.as_array()
    lo = cyl.start - N
    vals = x.values(lo, cyl.start + N + word.size - 1)
    hit = _kernels.match_positions(vals, word)
    return ReturningTimeSet(cyl, N, np.flatnonzero(hit).astype(np.int64) - N)


def max_gap(times: ReturningTimeSet | np.ndarray) -> int:
    t = times.times if isinstance(times, ReturningTimeSet) else np.asarray(times)
    if t.size < 2:
        raise MetricsError("max_gap needs at least two returning times")
    return int(np.diff(np.sort(t)).max())
