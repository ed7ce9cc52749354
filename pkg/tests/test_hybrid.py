import json
import math
import random
from fractions import Fraction

import pytest

from hybridsat.cnf import Formula, evaluate, hamming
from hybridsat.hybrid import (
    SolveReport, Strategy, brute_force, cover_for, grover_schoening_queries, naive_bottom_up, qfastball,
    schoening, solve, space_split_solve,
)
from hybridsat.instances import certified_unsat, pigeonhole, planted_3sat, random_3sat
from hybridsat.pbs import FastBallParams, PbsInstance, PbsStats, ball_scan, fast_ball
from hybridsat.resources import GAMMA0, qubit_count, r_tilde, threshold_ratio

X1 = Formula.from_clauses(1, [(1,)])
CONTRA = Formula.from_clauses(1, [(1,), (-1,)])


def test_brute_force_examples():
    assert brute_force(CONTRA).outcome == "UNSAT"
    rep = brute_force(X1)
    assert rep.outcome == "SAT" and rep.assignment == (1,)
    assert brute_force(pigeonhole(4, 3)).outcome == "UNSAT"
    with pytest.raises(ValueError):
        brute_force(Formula.from_clauses(25, [(1,)]))


def test_brute_force_returns_first_solution():
    f = Formula.from_clauses(3, [(2,), (3,)])
    assert brute_force(f).assignment == (0, 1, 1)


def test_strategy_validation():
    with pytest.raises(ValueError):
        Strategy("magic")
    with pytest.raises(ValueError):
        Strategy("split", "magic")
    with pytest.raises(ValueError):
        Strategy("split", "qfastball")
    with pytest.raises(ValueError):
        Strategy("naive")
    assert Strategy("split", "fastball").label == "split-fastball"
    assert Strategy("split", rho=0.25).rho == Fraction(1, 4)


def test_split_promise_agrees_with_brute_force():
    rng = random.Random(40)
    for _ in range(200):
        f = random_3sat(12, 50, rng)
        assert solve(f, Strategy("split", "promise")).outcome == brute_force(f).outcome


@pytest.mark.parametrize("pbs", ["promise", "fastball", "qball", "schoening"])
def test_planted_instances_are_solved(pbs):
    rng = random.Random(41)
    for _ in range(5):
        f, _ = planted_3sat(12, 51, rng)
        rep = solve(f, Strategy("split", pbs, seed=3))
        assert rep.outcome == "SAT" and evaluate(f, rep.assignment)


def test_split_unsat_matches_brute_force():
    f = certified_unsat(10, random.Random(42))
    for pbs in ("promise", "fastball", "qball"):
        rep = solve(f, Strategy("split", pbs))
        assert rep.outcome == "UNSAT" and rep.centers_tried == rep.extra["centers"]


def test_full_radius_is_one_pbs_call():
    centers, r = cover_for(6, 1, 1)
    assert centers == [(0,) * 6] and r == 6
    rep = space_split_solve(CONTRA, Strategy("split", "promise", rho=1))
    assert rep.pbs_calls == 1 and rep.outcome == "UNSAT"


def test_schoening_strategies_report_unknown():
    f = pigeonhole(4, 3)
    assert solve(f, Strategy("schoening", tries=20)).outcome == "UNKNOWN"
    assert solve(f, Strategy("split", "schoening", tries=5)).outcome == "UNKNOWN"
    assert schoening(X1).outcome == "SAT"


def test_report_json():
    rep = solve(X1, Strategy("split", "qfastball", qubits=10**6))
    d = json.loads(rep.to_json())
    assert d["outcome"] == "SAT" and d["assignment"] == "1" and d["schema"] == 1
    assert {"r_tilde", "oracle_queries", "radius", "centers"} <= set(d)
    assert rep.work == rep.nodes + rep.oracle_queries
    assert SolveReport("UNSAT").to_dict()["assignment"] is None


def test_qfastball_huge_budget_is_one_qball_call():
    rng = random.Random(43)
    f, _ = planted_3sat(10, 42, rng)
    inst = PbsInstance(f, (0,) * 10, 4)
    res, rt = qfastball(inst, M=10**9)
    assert rt == 10 and res.stats.qball_calls == 1 and res.stats.r_calls == [(4, "top")]
    assert res.found == (ball_scan(inst) is not None)


def test_qfastball_zero_budget_is_fastball():
    f = random_3sat(12, 50, random.Random(44))
    inst = PbsInstance(f, (1,) * 12, 4)
    a = fast_ball(inst)
    b, rt = qfastball(inst, M=0)
    assert rt == 0 and a.assignment == b.assignment and a.stats == b.stats


@pytest.mark.parametrize("t", [3, 6])
def test_qfastball_switchover_radii(t):
    rng = random.Random(45)
    n, r = 16, 5
    M = qubit_count(n, 3) + 0.5
    assert r_tilde(n, M) == 3
    p = FastBallParams(t=t)
    for idx in range(100 if t == 3 else 30):
        if idx % 2:
            f, planted = planted_3sat(n, 68, rng)
            center = list(planted)
            for i in rng.sample(range(n), rng.randint(0, 7)):
                center[i] ^= 1
        else:
            f = random_3sat(n, 80, rng)
            center = [rng.randrange(2) for _ in range(n)]
        inst = PbsInstance(f, tuple(center), r)
        res, rt = qfastball(inst, p, M, seed=idx)
        assert res.found == (ball_scan(inst) is not None)
        if res.found:
            assert evaluate(f, res.assignment) and hamming(res.assignment, center) <= r
        for rc, kind in res.stats.r_calls:
            assert rt >= rc > rt - p.delta, (rc, kind)


def test_naive_examples():
    f, _ = planted_3sat(8, 34, random.Random(46))
    full = naive_bottom_up(f, 8)
    assert full.pbs_calls == 1 and full.outcome == "SAT"
    zero = naive_bottom_up(f, 0)
    assert zero.extra["queries_per_residual"] == 1 and zero.outcome == "SAT"
    assert naive_bottom_up(CONTRA, 1).outcome == "UNSAT"
    with pytest.raises(ValueError):
        naive_bottom_up(f, 9)
    assert grover_schoening_queries(0) == 1


def test_naive_exponent_near_formula():
    rng = random.Random(47)
    n, m = 14, 6
    f, _ = planted_3sat(n, round(4.26 * n), rng)
    rep = solve(f, Strategy("naive", m=m))
    assert rep.outcome == "SAT"
    want = (n - m) / n + GAMMA0 * m / (2 * n)
    assert rep.extra["formula_exponent"] == pytest.approx(want)
    assert abs(rep.extra["model_exponent"] - want) <= 0.15 * want


def test_naive_threshold_crossover():
    mu = threshold_ratio()
    # model exponents of large instances: the crossover against Schoening sits at mu
    n = 10**6
    for frac, faster in ((mu - 0.01, False), (mu + 0.01, True)):
        m = round(frac * n)
        e = ((n - m) + math.log2(grover_schoening_queries(min(m, 2000))) * m / min(m, 2000)) / n
        assert (e < GAMMA0) == faster
