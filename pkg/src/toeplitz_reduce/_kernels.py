"""Hot inner loops, each in a numba and a pure-numpy flavour.

The numba path is used when numba imports and ``TOEPLITZ_REDUCE_PURE_NUMPY``
is unset (or ``0``). Both paths must return identical arrays; the test suite
and ``benchmarks/bench_kernels.py`` exercise them side by side.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

ENV_FLAG = "TOEPLITZ_REDUCE_PURE_NUMPY"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


def splitmix64(x: int) -> int:
    """Scalar splitmix64 finalizer, used to whiten a user seed."""
    mask = (1 << 64) - 1
    z = (x + 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


# ---------------------------------------------------------------------------
# pure numpy

def _np_prf_symbols(idx_u64, key, k):
    key = np.uint64(key)
    with np.errstate(over="ignore"):
        z = key ^ (idx_u64 * _GOLDEN)
        z = (z ^ (z >> _S30)) * _MIX1
        z = (z ^ (z >> _S27)) * _MIX2
        z = z ^ (z >> _S31)
    return (z % np.uint64(k)).astype(np.uint8) + np.uint8(1)


def _np_block_offsets(idx, period, shift, width):
    d = (idx + shift) % period
    return np.where(d < width, d, -1).astype(np.int64)


def _np_window_codes(vals, n, k):
    # base-k code of every length-n window; caller guarantees k**n < 2**62
    m = vals.size - n + 1
    digits = vals.astype(np.int64) - 1
    codes = np.zeros(m, dtype=np.int64)
    for j in range(n):
        codes = codes * k + digits[j:j + m]
    return codes


def _np_match_positions(vals, word):
    L = word.size
    m = vals.size - L + 1
    hit = np.ones(m, dtype=np.bool_)
    for j in range(L):
        hit &= vals[j:j + m] == word[j]
    return hit


def _np_mobius_sieve(N):
    is_prime = np.ones(N + 1, dtype=np.bool_)
    is_prime[:2] = False
    for p in range(2, int(N ** 0.5) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    mu = np.ones(N + 1, dtype=np.int8)
    mu[0] = 0
    for p in np.flatnonzero(is_prime).tolist():
        mu[p::p] *= -1
        if p * p <= N:
            mu[p * p::p * p] = 0
    return mu


# ---------------------------------------------------------------------------
# numba

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

if numba is not None:
    _njit = numba.njit(cache=True, nogil=True)

    @_njit
    def prf_symbols(idx_u64, key, k):
        out = np.empty(idx_u64.size, dtype=np.uint8)
        kk = np.uint64(k)
        for i in range(idx_u64.size):
            z = key ^ (idx_u64[i] * _GOLDEN)
            z = (z ^ (z >> _S30)) * _MIX1
            z = (z ^ (z >> _S27)) * _MIX2
            z = z ^ (z >> _S31)
            out[i] = np.uint8(z % kk) + np.uint8(1)
        return out

    @_njit
    def block_offsets(idx, period, shift, width):
        out = np.empty(idx.size, dtype=np.int64)
        for i in range(idx.size):
            d = (idx[i] + shift) % period
            out[i] = d if d < width else -1
        return out

    @_njit
    def window_codes(vals, n, k):
        m = vals.size - n + 1
        out = np.empty(m, dtype=np.int64)
        top = np.int64(1)
        for _ in range(n - 1):
            top *= k
        c = np.int64(0)
        for j in range(n):
            c = c * k + (np.int64(vals[j]) - 1)
        out[0] = c
        for s in range(1, m):
            c = (c - (np.int64(vals[s - 1]) - 1) * top) * k + (np.int64(vals[s + n - 1]) - 1)
            out[s] = c
        return out

    @_njit
    def match_positions(vals, word):
        L = word.size
        m = vals.size - L + 1
        out = np.zeros(m, dtype=np.bool_)
        for s in range(m):
            ok = True
            for j in range(L):
                if vals[s + j] != word[j]:
                    ok = False
                    break
            out[s] = ok
        return out

    @_njit
    def mobius_sieve(N):
        # linear sieve: each composite is struck once, by its least prime factor
        mu = np.zeros(N + 1, dtype=np.int8)
        primes = np.empty(N + 1, dtype=np.int64)
        is_comp = np.zeros(N + 1, dtype=np.bool_)
        n_primes = 0
        if N >= 1:
            mu[1] = 1
        for i in range(2, N + 1):
            if not is_comp[i]:
                primes[n_primes] = i
                n_primes += 1
                mu[i] = -1
            for j in range(n_primes):
                p = primes[j]
                ip = i * p
                if ip > N:
                    break
                is_comp[ip] = True
                if i % p == 0:
                    mu[ip] = 0
                    break
                mu[ip] = -mu[i]
        return mu

    numba_kernels = SimpleNamespace(
        name="numba",
        prf_symbols=prf_symbols,
        block_offsets=block_offsets,
        window_codes=window_codes,
        match_positions=match_positions,
        mobius_sieve=mobius_sieve,
    )
else:  # pragma: no cover
    numba_kernels = None


numpy_kernels = SimpleNamespace(
    name="numpy",
    prf_symbols=_np_prf_symbols,
    block_offsets=_np_block_offsets,
    window_codes=_np_window_codes,
    match_positions=_np_match_positions,
    mobius_sieve=_np_mobius_sieve,
)

def _pure_numpy_requested() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("", "0", "false", "no")


active = numpy_kernels if (numba_kernels is None or _pure_numpy_requested()) else numba_kernels
BACKEND = active.name


def prf_symbols(idx: np.ndarray, key: int, k: int) -> np.ndarray:
    """Symbols 1..k from a keyed counter-mode hash of each int64 index."""
    idx = np.ascontiguousarray(idx, dtype=np.int64).view(np.uint64)
    return active.prf_symbols(idx, np.uint64(key), k)


def block_offsets(idx: np.ndarray, period: int, shift: int, width: int) -> np.ndarray:
    """Offset of each index inside its periodic block, or -1 outside.

    A block starts at ``r*period - shift`` and spans ``width`` positions.
    """
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    return active.block_offsets(idx, np.int64(period), np.int64(shift), np.int64(width))


def window_codes(vals: np.ndarray, n: int, k: int) -> np.ndarray:
    vals = np.ascontiguousarray(vals, dtype=np.uint8)
    return active.window_codes(vals, n, k)


def match_positions(vals: np.ndarray, word: np.ndarray) -> np.ndarray:
    vals = np.ascontiguousarray(vals, dtype=np.uint8)
    word = np.ascontiguousarray(word, dtype=np.uint8)
    return active.match_positions(vals, word)


def mobius_sieve(N: int) -> np.ndarray:
    """mu(0..N) as int8, with mu(0) = 0."""
    return active.mobius_sieve(N)
