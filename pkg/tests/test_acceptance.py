"""Exit criteria, one test per criterion, each printing a PASS/FAIL line."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import DATA
from toeplitz_reduce import cli
from toeplitz_reduce import complexity as X
from toeplitz_reduce import construct as C
from toeplitz_reduce import metrics as Mt
from toeplitz_reduce import mobius as Mo
from toeplitz_reduce import seq as S

EPS = Fraction(3, 10)
N_STAGE = 10 ** 4


@pytest.fixture
def verdict(capsys):
    def emit(num, title, results):
        failed = [name for name, ok in results.items() if not ok]
        with capsys.disabled():
            status = "PASS" if not failed else "FAIL " + ", ".join(failed)
            print(f"\n[acceptance {num:2d}] {status}: {title}")
        assert not failed, failed
    return emit


def _instance():
    a = S.bernoulli(2, 42)
    b, trace = C.build(a, EPS, 2)
    return a, b, trace


def test_01_stage_properties_exact(verdict):
    t0 = time.perf_counter()
    a, b, tr = _instance()
    checks = {c.name: c for c in C.verify_stage_properties(tr, N_STAGE)}
    elapsed = time.perf_counter() - t0
    res = {"l_1=20, l_2=2400": [p.l for p in tr.stages] == [20, 2400]}
    for M in (1, 2):
        res[f"I_{M}"] = checks[f"I_{M}"].passed
        res[f"III_{M}"] = checks[f"III_{M}"].passed
        bound = tr.stages[M - 1].density_bound(2)
        big = [cp for cp in checks[f"II_{M}"].detail["checkpoints"] if cp["N"] >= tr.stages[M - 1].l]
        res[f"II_{M} for N' >= l_{M}"] = bool(big) and all(cp["density"] <= bound for cp in big)
    res["runtime < 10 s"] = elapsed < 10
    verdict(1, f"stage properties exact (runtime {elapsed:.2f} s)", res)


def test_02_density_surrogate(verdict):
    a, b, tr = _instance()
    d = Mt.difference_density(a, b, N_STAGE)
    bound = Fraction(2, 20) + Fraction(80, 2400)
    verdict(2, f"difference density {d} < 3/10 and <= 2/15", {
        "< epsilon": d < EPS,
        "<= sum of stage bounds": d <= bound,
        "bound is 2/15": sum(p.density_bound(2) for p in tr.stages) == Fraction(2, 15) == bound,
    })


def test_03_complexity_chain(verdict):
    a, b, tr = _instance()
    N = 3 * tr.stages[-1].l
    checks = {c.name: c for c in X.verify_complexity_chain(a, tr, N)}
    res = {name: checks[name].passed for name in
           ("c1_1", "c2_1", "c3_1", "c1_2", "c2_2", "c3_2")}
    for M, p in ((1, tr.stages[0]), (2, tr.stages[1])):
        d = checks[f"c3_{M}"].detail
        res[f"B_l{M}(b) <= (l+1) W^2"] = d["B_b_interior"] <= (p.l + 1) * d["W_b"] ** 2
    verdict(3, "complexity chain c1-c3 at N = 3*l_2", res)


def test_04_toeplitz_coverage(verdict):
    a, b, tr = _instance()
    cov = Mt.toeplitz_coverage(b, tr, N_STAGE)
    p2 = tr.stages[1]
    rt = Mt.returning_times(b, S.CylinderSpec(p2.varpi), N_STAGE)
    multiples = range(-(N_STAGE // p2.l) * p2.l, N_STAGE + 1, p2.l)
    verdict(4, "coverage 1, l_2 Z in returning times, max gap <= l_2", {
        "coverage == 1": cov.fraction == 1,
        "varpi_2 anchored at -l_1": p2.varpi.start == -20 and len(p2.varpi) == 40,
        "multiples of l_2 return": all(t in rt for t in multiples),
        "max_gap <= l_2": Mt.max_gap(rt) <= p2.l,
    })


def test_05_stabilization(verdict):
    a, b, tr = _instance()
    w1 = tr.sequences[1].values(-20, 19)
    w2 = tr.sequences[2].values(-20, 19)
    verdict(5, "central window of a^(1) survives stage 2 and the limit", {
        "a^(2) == a^(1)": np.array_equal(w1, w2),
        "b == a^(2)": np.array_equal(b.values(-20, 19), w2),
        "IV checks": all(c.passed for c in C.check_stabilization(tr)),
    })


def test_06_hand_simulation_golden(verdict):
    golden = S.read_seqw(DATA / "periodic122_l4_l16.seqw")
    a = S.periodic(2, [1, 2, 2])
    b, tr = C.build(a, Fraction(9), 2, l_overrides={1: 4, 2: 16})
    verdict(6, "periodic 1,2,2 with l_1=4, l_2=16 matches the hand-derived window [-16, 15]", {
        "b": b.values(-16, 15).tolist() == golden.values(-16, 15).tolist(),
        "a^(2)": tr.sequences[2].values(-16, 15).tolist() == golden.values(-16, 15).tolist(),
    })


def test_07_entropy_sanity(verdict):
    n_max = 10
    const = X.entropy_estimate(S.constant(2, 1), n_max, 1000)
    per = X.entropy_estimate(S.periodic(2, [1, 2, 2]), n_max, 1000)
    bern = X.entropy_estimate(S.bernoulli(2, 42), n_max, 10 ** 5)
    verdict(7, f"entropy: constant {const.estimate}, periodic {per.estimate:.4f}, "
               f"bernoulli {bern.estimate:.4f}", {
        "constant <= log(1)/n_max": const.estimate <= math.log(1) / n_max,
        "periodic <= log(3)/n_max": per.estimate <= math.log(3) / n_max,
        "bernoulli in [0.66, 0.694]": 0.66 <= bern.estimate <= 0.694,
    })


def test_08_mobius(verdict):
    t0 = time.perf_counter()
    table = Mo.mobius_sieve(10 ** 6)
    oracle_ok = all(table[n] == Mo.mobius_by_factorization(n) for n in range(1, 10 ** 4 + 1))
    m10 = Mo.mertens(table, 10)
    brute10 = sum(Mo.mobius_by_factorization(n) for n in range(1, 11))
    m6 = Mo.mertens(table, 10 ** 6)
    self_corr = Mo.correlate(table, Mo.mobius_sequence(table), 10 ** 6, Mo.MU_RECODING).final
    density = Fraction(int(np.count_nonzero(table.values[1:])), 10 ** 6)
    elapsed = time.perf_counter() - t0
    verdict(8, f"mobius (M(10^6)={m6}, runtime {elapsed:.2f} s)", {
        "sieve == trial division on n <= 10^4": oracle_ok,
        "mertens(10) == -1 == brute": m10 == brute10 == -1,
        "|M(10^6)|/10^6 <= 1e-3": Fraction(abs(m6), 10 ** 6) <= Fraction(1, 1000),
        "self-correlation within 0.001 of squarefree density": abs(self_corr - density) <= Fraction(1, 1000),
        "runtime < 5 s": elapsed < 5,
    })


def _runs(tmp_path):
    seqw = tmp_path / "b.seqw"
    return [
        ["verify", "--k", "2", "--source", "bernoulli:seed=42", "--epsilon", "3/10", "--stages", "2",
         "--window", "10000", "--chain-window", "7200", "--out", str(tmp_path / "verify.json")],
        ["construct", "--source", "periodic:1,2,2", "--epsilon", "9", "--override-l", "1=4", "--override-l", "2=16",
         "--window", "16", "--provenance-radius", "16", "--out", str(tmp_path / "hand.json"),
         "--trace-out", str(tmp_path / "trace.json"), "--seqw-out", str(seqw)],
        ["entropy", "--source", "constant:1", "--window", "1000", "--nmax", "10", "--out", str(tmp_path / "e1.json")],
        ["entropy", "--source", "periodic:1,2,2", "--window", "1000", "--nmax", "10", "--out", str(tmp_path / "e2.json")],
        ["entropy", "--source", "bernoulli:seed=42", "--window", "100000", "--nmax", "10",
         "--out", str(tmp_path / "e3.json"), "--csv-out", str(tmp_path / "e3.csv")],
        ["mobius", "--N", "1000000", "--out", str(tmp_path / "mobius.json")],
    ]


def test_09_determinism(verdict, tmp_path):
    codes, snapshots = [], []
    for _ in range(2):
        for argv in _runs(tmp_path):
            codes.append(cli.main(argv))
        snapshots.append({p.name: p.read_bytes() for p in sorted(tmp_path.iterdir())})
    verdict(9, f"byte-identical reports across reruns ({len(snapshots[0])} files)", {
        "all runs exit 0": all(c == 0 for c in codes),
        "same files": snapshots[0].keys() == snapshots[1].keys() and len(snapshots[0]) == 9,
        "same bytes": snapshots[0] == snapshots[1],
    })


def test_10_fault_injection(verdict):
    a, b, tr = _instance()
    target = -3 * 2400 + 7  # inside the r=-3 stage-2 block
    bad_b = S.flip_symbol(b, target)
    checks = {c.name: c for c in C.verify_stage_properties(tr.with_b(bad_b), N_STAGE)}
    w = checks["I_2[b]"].witness or {}
    rnd = S.bernoulli(2, 4242)
    cov = Mt.toeplitz_coverage(rnd, tr, N_STAGE)
    chain = {c.name: c for c in X.verify_complexity_chain(a, tr.with_b(rnd), 3 * 2400)}
    verdict(10, f"fault injection (witness {w.get('index')}, random coverage {float(cov.fraction):.3f})", {
        "I_2 on corrupted b fails": not checks["I_2[b]"].passed,
        "witness index is the flipped index": w.get("index") == target,
        "random b coverage < 1": cov.fraction < 1,
        "random b fails c2": not chain["c2_2"].passed,
    })
