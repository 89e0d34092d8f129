import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_aligned, brute_blocks
from toeplitz_reduce import complexity as X
from toeplitz_reduce import construct as C
from toeplitz_reduce import seq as S


def _tuples(ws):
    return {tuple(w) for w in ws.words}


def test_blocks_examples():
    assert X.blocks(S.constant(2, 1), 5, 100).strings() == ["11111"]
    assert X.blocks(S.periodic(2, [1, 2]), 4, 10).strings() == ["1212", "2121"]
    assert len(brute_blocks(S.periodic(2, [1, 2]), 4, -10, 10)) == 2
    bern = X.blocks(S.bernoulli(2, 42), 1, 1000)
    assert len(bern) <= 2
    assert len(bern) == 2


def test_aligned_examples():
    assert len(X.aligned_words(S.constant(2, 2), 8, 100)) == 1
    assert X.aligned_words(S.periodic(2, [1, 2]), 4, 20).strings() == ["1212"]
    p3 = S.periodic(2, [1, 2, 2])
    got = X.aligned_words(p3, 4, 24)
    assert _tuples(got) == brute_aligned(p3, 4, 24)
    assert len(got) == 3


def test_preconditions():
    with pytest.raises(X.ComplexityError):
        X.blocks(S.constant(2, 1), 0, 3)
    with pytest.raises(X.ComplexityError):
        X.blocks(S.constant(2, 1), 8, 3)
    with pytest.raises(X.ComplexityError):
        X.aligned_words(S.constant(2, 1), 8, 7)
    with pytest.raises(X.ComplexityError):
        X.entropy_estimate(S.constant(2, 1), 30, 10)


@given(st.integers(0, 2 ** 20), st.integers(2, 4), st.integers(1, 14), st.integers(10, 60))
@settings(max_examples=40, deadline=None)
def test_blocks_against_brute_and_bounds(seed, k, n, N):
    g = S.bernoulli(k, seed)
    ws = X.blocks(g, n, N)
    assert _tuples(ws) == brute_blocks(g, n, -N, N)
    assert len(ws) <= min(k ** n, 2 * N + 2 - n)
    assert X.block_count(g, n, N) == len(ws)
    assert X.blocks(g, n, N + 5).words >= ws.words


@given(st.integers(0, 2 ** 20), st.integers(1, 9), st.integers(10, 60))
@settings(max_examples=40, deadline=None)
def test_aligned_subset_of_blocks(seed, l, N):
    if N < l:
        return
    g = S.bernoulli(2, seed)
    aw = X.aligned_words(g, l, N)
    assert _tuples(aw) == brute_aligned(g, l, N)
    assert aw.issubset(X.blocks(g, l, N))
    assert X.aligned_words(g, l, N + l).words >= aw.words


def test_long_words_use_exact_path():
    g = S.bernoulli(3, 5)
    # 3**70 overflows int64 codes; counts still exact
    assert X.block_count(g, 70, 200) == len(brute_blocks(g, 70, -200, 200))


def test_entropy_examples():
    prof = X.entropy_estimate(S.constant(2, 1), 8, 100)
    assert all(h == 0 for _, _, h in prof.rows)
    prof = X.entropy_estimate(S.periodic(2, [1, 2, 2]), 12, 200)
    assert all(c <= 3 for _, c, _ in prof.rows)
    assert prof.estimate <= math.log(3) / 12
    prof = X.entropy_estimate(S.bernoulli(2, 42), 10, 100000)
    assert prof.rows[-1][1] == 1024
    assert 0.66 <= prof.estimate <= 0.694
    csv_text = prof.to_csv()
    assert csv_text.splitlines()[0] == "n,count,log_count_over_n"
    assert csv_text.splitlines()[10].startswith("10,1024,")


def test_word_set_exports():
    ws = X.blocks(S.periodic(2, [1, 2]), 3, 10)
    assert ws.to_lines() == "121\n212\n"
    assert [1, 2, 1] in ws and b"\x02\x01\x02" in ws


def test_complexity_chain_constant():
    a = S.constant(2, 1)
    _, tr = C.build(a, Fraction(9), 2, l_overrides={1: 4, 2: 16})
    checks = X.verify_complexity_chain(a, tr, 200)
    assert all(c.passed for c in checks)
    for c in checks:
        if c.name.startswith("c3"):
            assert c.detail["W_b"] == 1 and c.detail["B_b_interior"] == 1


def test_complexity_chain_periodic(hand_instance):
    a, _, tr = hand_instance
    checks = {c.name: c for c in X.verify_complexity_chain(a, tr, 200)}
    assert all(c.passed for c in checks.values())
    # sizes by direct enumeration
    assert checks["c1_1"].detail["counts_from_stage_M_down_to_input"] == [
        len(brute_aligned(tr.sequences[j], 4, 200)) for j in (1, 0)]
    assert checks["c1_2"].detail["counts_from_stage_M_down_to_input"] == [
        len(brute_aligned(tr.sequences[j], 16, 200)) for j in (2, 1, 0)]
    assert checks["c3_2"].detail["W_b"] == len(brute_aligned(tr.b, 16, 200))
    assert checks["c3_2"].detail["B_b_interior"] == len(brute_blocks(tr.b, 16, -184, 184))


def test_complexity_chain_fault_injection(bernoulli_instance):
    a, _, tr = bernoulli_instance
    bad = tr.with_b(S.bernoulli(2, 777))
    checks = {c.name: c for c in X.verify_complexity_chain(a, bad, 7200)}
    assert not checks["c2_2"].passed
    w = checks["c2_2"].witness
    assert len(w["word"]) == 2400 and w["start"] % 2400 == 0


def test_complexity_chain_precondition(bernoulli_instance):
    a, _, tr = bernoulli_instance
    with pytest.raises(X.ComplexityError):
        X.verify_complexity_chain(a, tr, 3000)


def test_profile_builder():
    prof = X.complexity_profile(S.periodic(2, [1, 2]), 20, lengths=[2, 3], stage_lengths={1: 4})
    assert len(prof.blocks[2]) == 2 and prof.aligned[1].strings() == ["1212"]
