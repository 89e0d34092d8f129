"""Time each hot kernel on its numba and pure-numpy paths.

    python benchmarks/bench_kernels.py [--size 1000000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from toeplitz_reduce import _kernels as K


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT compilation on the numba path
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(size):
    rng = np.random.default_rng(0)
    idx = np.arange(-size // 2, size // 2, dtype=np.int64)
    idx_u = idx.view(np.uint64)
    vals = rng.integers(1, 3, size=size).astype(np.uint8)
    word = vals[1000:1040].copy()
    key = np.uint64(K.splitmix64(42))
    return {
        "prf_symbols": lambda ks: ks.prf_symbols(idx_u, key, 2),
        "block_offsets": lambda ks: ks.block_offsets(idx, np.int64(2400), np.int64(20), np.int64(40)),
        "window_codes(n=20)": lambda ks: ks.window_codes(vals, 20, 2),
        "match_positions(len=40)": lambda ks: ks.match_positions(vals, word),
        "mobius_sieve": lambda ks: ks.mobius_sieve(size),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if K.numba_kernels is None:
        raise SystemExit("numba is not importable; nothing to compare")

    print(f"size={args.size} repeat={args.repeat}")
    print(f"{'kernel':<26}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, fn in cases(args.size).items():
        a = fn(K.numpy_kernels)
        b = fn(K.numba_kernels)
        assert np.array_equal(a, b), f"{name}: paths disagree"
        t_np = best_of(lambda: fn(K.numpy_kernels), args.repeat)
        t_nb = best_of(lambda: fn(K.numba_kernels), args.repeat)
        print(f"{name:<26}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
