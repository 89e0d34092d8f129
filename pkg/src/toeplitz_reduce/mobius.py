"""Mobius sieve, Mertens sums and correlation of mu against sequence observables."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import _kernels
from .metrics import log_checkpoints
from .seq import Alphabet, BiSequence, OutOfDomainError


class MobiusError(ValueError):
    pass


@dataclass(frozen=True)
class MobiusTable:
    N: int
    values: np.ndarray  # index n holds mu(n); index 0 is a placeholder 0

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.N:
            raise MobiusError(f"mu({n}) outside table range 1..{self.N}")
        return int(self.values[n])

    def to_text(self) -> str:
        return "\n".join(map(str, self.values[1:].tolist())) + "\n"


def mobius_sieve(N: int) -> MobiusTable:
    if N < 1:
        raise MobiusError(f"empty range: N must be >= 1, got {N}")
    return MobiusTable(int(N), _kernels.mobius_sieve(int(N)))


def mobius_by_factorization(n: int) -> int:
    """mu(n) by trial division; slow, independent of the sieve."""
    if n < 1:
        raise MobiusError("mu is defined on positive integers")
    sign, d = 1, 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            sign = -sign
        d += 1
    return -sign if n > 1 else sign


def mertens(table: MobiusTable, n: int) -> int:
    if not 0 <= n <= table.N:
        raise MobiusError(f"mertens({n}) outside table range 0..{table.N}")
    return int(table.values[1:n + 1].sum(dtype=np.int64))


def mobius_sequence(table: MobiusTable) -> BiSequence:
    """mu as a partial sequence over symbols 1..3 (mu + 2), defined on 1..N."""
    vals = (table.values.astype(np.int16) + 2).astype(np.uint8)
    N = table.N

    def func(idx):
        if idx.min() < 1 or idx.max() > N:
            raise OutOfDomainError(f"mu sequence only defined on 1..{N}")
        return vals[idx]

    return BiSequence(Alphabet(3), func, f"mobius(N={N})")


MU_RECODING = {1: Fraction(-1), 2: Fraction(0), 3: Fraction(1)}


@dataclass(frozen=True)
class CorrelationReport:
    description: str
    N: int
    recoding: dict[int, Fraction]
    checkpoints: tuple[tuple[int, Fraction], ...]

    @property
    def final(self) -> Fraction:
        return self.checkpoints[-1][1]

    def to_json(self) -> dict:
        return {
            "observable": self.description,
            "N": self.N,
            "recoding": {str(s): v for s, v in sorted(self.recoding.items())},
            "checkpoints": [{"N": n, "S": s, "S_float": float(s)} for n, s in self.checkpoints],
        }


def correlate(table: MobiusTable, xi: BiSequence, N: int,
              recoding: Mapping[int, Fraction] | None = None) -> CorrelationReport:
    """S(N') = (1/N') * sum_{n<=N'} mu(n) f(xi_n) at N' in {1, 10, ...} and N, exactly.

    ``recoding`` maps symbols to rationals; the default is the symbol value itself.
    """
    if not 1 <= N <= table.N:
        raise MobiusError(f"N={N} outside table range 1..{table.N}")
    k = xi.k
    rec = {s: Fraction(s) for s in range(1, k + 1)}
    if recoding:
        for s, v in recoding.items():
            if not 1 <= s <= k:
                raise MobiusError(f"recoding symbol {s} outside 1..{k}")
            rec[int(s)] = Fraction(v)
    mu = table.values[1:N + 1].astype(np.int64)
    sym = xi.values(1, N)
    cps = log_checkpoints(N)
    # per-symbol running sums of mu are exact integers, so the order of summation is irrelevant
    per_symbol = {}
    for s in range(1, k + 1):
        c = np.cumsum(np.where(sym == s, mu, 0))
        per_symbol[s] = [int(c[n - 1]) for n in cps]
    out = []
    for i, n in enumerate(cps):
        total = sum((rec[s] * per_symbol[s][i] for s in range(1, k + 1)), Fraction(0))
        out.append((n, total / n))
    return CorrelationReport(xi.description, N, rec, tuple(out))
