"""Slow, literal reference implementations used only by the tests.

None of these touch the package's kernels: sequences are read one index at a
time through ``eval_at`` and every set is a plain Python set.
"""

from fractions import Fraction

from toeplitz_reduce.seq import eval_at


def literal_stages(a, ls, lo, hi):
    """Dicts a^(0..len(ls)) on [lo, hi], applying each overwrite rule index by index.

    [lo, hi] must contain every central block the stages copy.
    """
    cur = {n: eval_at(a, n) for n in range(lo, hi + 1)}
    out = [dict(cur)]
    a0 = cur[0]
    l_prev = 1
    for M, l in enumerate(ls, start=1):
        new = dict(cur)
        if M == 1:
            for n in range(lo, hi + 1):
                if n % l == 0:
                    new[n] = a0
        else:
            varpi = [cur[i] for i in range(-l_prev, l_prev)]
            r = (lo // l) - 1
            while r * l - l_prev <= hi:
                for j, s in enumerate(varpi):
                    pos = r * l - l_prev + j
                    if lo <= pos <= hi:
                        new[pos] = s
                r += 1
        out.append(new)
        cur = new
        l_prev = l
    return out


def brute_blocks(seq, n, lo, hi):
    vals = [eval_at(seq, i) for i in range(lo, hi + 1)]
    return {tuple(vals[s:s + n]) for s in range(len(vals) - n + 1)}


def brute_aligned(seq, l, N):
    out = set()
    for r in range(-N, N + 1):
        s = r * l
        if -N <= s and s + l - 1 <= N:
            out.add(tuple(eval_at(seq, i) for i in range(s, s + l)))
    return out


def brute_density(x, y, N):
    return Fraction(sum(abs(eval_at(x, n) - eval_at(y, n)) for n in range(-N, N + 1)), 2 * N + 1)


def min_l(bound_num, eps, step=1):
    """Least multiple l of ``step`` with bound_num / l <= eps, by counting upwards."""
    l = step
    while Fraction(bound_num, l) > eps:
        l += step
    return l
