"""End-to-end 3-SAT drivers: brute force, space splitting over cover centers with a
pluggable PBS solver, the QBall-enhanced FastBall, and the bottom-up hybrid."""

from __future__ import annotations

import json
import logging
import math
import random
import time
from dataclasses import dataclass, field, asdict
from fractions import Fraction

import numpy as np

from .amplification import leaves, count_marked, miss_queries, qball_solve, sample_marked
from .cnf import Formula, assignment_str, evaluate, restrict_many
from .covering import as_fraction, build_binary_cover
from .pbs import (
    FastBallParams, PbsInstance, PbsResult, PbsStats, _promise, derive_seed, fast_ball, promise_ball,
    schoening_pbs, schoening_walk,
)
from .resources import GAMMA0, QubitModel, r_tilde

log = logging.getLogger(__name__)

REPORT_SCHEMA = 1
BRUTE_MAX_VARS = 24
PBS_KINDS = ("schoening", "promise", "fastball", "qball", "qfastball")
KINDS = ("brute", "schoening", "split", "naive")


@dataclass
class Strategy:
    kind: str = "brute"
    pbs: str = "promise"
    rho: Fraction = Fraction(1, 3)
    d: int = 1
    t: int = 3
    k: int = 3
    qubits: float | None = None
    m: int | None = None
    seed: int = 0
    tries: int | None = None  # Schoening restarts; None picks a default

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}; choose from {KINDS}")
        if self.kind == "split" and self.pbs not in PBS_KINDS:
            raise ValueError(f"unknown PBS solver {self.pbs!r}; choose from {PBS_KINDS}")
        if self.kind == "split" and self.pbs == "qfastball" and self.qubits is None:
            raise ValueError("qfastball needs a qubit budget")
        if self.kind == "naive" and self.m is None:
            raise ValueError("the bottom-up hybrid needs m")
        self.rho = as_fraction(self.rho)

    @property
    def label(self) -> str:
        if self.kind == "split":
            return f"split-{self.pbs}"
        return self.kind


@dataclass
class SolveReport:
    outcome: str  # SAT, UNSAT or UNKNOWN
    assignment: tuple[int, ...] | None = None
    strategy: str = ""
    centers_tried: int = 0
    pbs_calls: int = 0
    nodes: int = 0
    leaves: int = 0
    clause_evals: int = 0
    qball_calls: int = 0
    oracle_queries: int = 0
    extra: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def absorb(self, st: PbsStats) -> None:
        self.nodes += st.nodes
        self.leaves += st.leaves
        self.clause_evals += st.clause_evals
        self.qball_calls += st.qball_calls
        self.oracle_queries += st.oracle_queries

    @property
    def work(self) -> int:
        """Classical search nodes plus quantum oracle queries."""
        return self.nodes + self.oracle_queries

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(d.pop("extra"))
        d["assignment"] = assignment_str(self.assignment) if self.assignment is not None else None
        d["schema"] = REPORT_SCHEMA
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ------------------------------------------------------------- brute force


def brute_force(f: Formula) -> SolveReport:
    """Exhaustive scan in increasing integer order (bit i of the index is x_{i+1})."""
    n = f.num_vars
    if n > BRUTE_MAX_VARS:
        raise ValueError(f"brute force limited to n <= {BRUTE_MAX_VARS}, got {n}")
    t0 = time.perf_counter()
    chunk = 1 << min(n, 20)
    for base in range(0, 1 << n, chunk):
        idx = np.arange(base, base + chunk, dtype=np.int64)
        ok = np.ones(chunk, dtype=bool)
        for c in f.clauses:
            sat = np.zeros(chunk, dtype=bool)
            for lit in c:
                bit = ((idx >> (abs(lit) - 1)) & 1).astype(bool)
                sat |= bit if lit > 0 else ~bit
            ok &= sat
        hits = np.flatnonzero(ok)
        if hits.size:
            v = int(idx[hits[0]])
            y = tuple((v >> i) & 1 for i in range(n))
            return SolveReport("SAT", y, "brute", clause_evals=len(f.clauses) * (v + 1),
                               wall_time=time.perf_counter() - t0)
    return SolveReport("UNSAT", None, "brute", clause_evals=len(f.clauses) << n,
                       wall_time=time.perf_counter() - t0)


def schoening(f: Formula, seed: int = 0, tries: int | None = None) -> SolveReport:
    """Random restarts of 3n-step walks; UNKNOWN when every try fails."""
    n = f.num_vars
    tries = tries if tries is not None else math.ceil(20 * (4 / 3) ** n)
    t0 = time.perf_counter()
    rep = SolveReport("UNKNOWN", strategy="schoening")
    st = PbsStats()
    for i in range(tries):
        rng = random.Random(derive_seed(seed, i))
        x = tuple(rng.randrange(2) for _ in range(n))
        res = schoening_walk(PbsInstance(f, x, n), rng_seed=derive_seed(seed, i, 1), stats=st)
        st.leaves += 1
        if res.found:
            rep.outcome, rep.assignment = "SAT", res.assignment
            break
    rep.absorb(st)
    rep.extra["tries"] = tries
    rep.wall_time = time.perf_counter() - t0
    return rep


# -------------------------------------------------------------- QFastBall


class QBallLeaf:
    """Hook that hands a node of the classical recursion to QBall once its radius is <= r_tilde.

    QBall marks the choice vectors whose point satisfies F and lies in the top
    ball.  If none does, but some vector reaches a satisfying point outside the
    top ball, the node's answer is not settled by QBall alone; that node is
    then finished by the guarded classical search.
    """

    def __init__(self, n: int, rt: int, seed: int, kind: str):
        self.n = n
        self.rt = rt
        self.seed = seed
        self.kind = kind
        self.calls = 0

    def __call__(self, clauses, y, r, fixed, guard, stats):
        if r > self.rt:
            return NotImplemented
        self.calls += 1
        stats.qball_calls += 1
        stats.r_calls.append((r, self.kind))
        f_loc = Formula(self.n, tuple(clauses))
        lv = leaves(f_loc, r, center=y)
        accepted = count_marked(lv, guard.accepts)
        if accepted.marked:
            s = sample_marked(accepted, random.Random(derive_seed(self.seed, self.calls)), stats)
            return next(l.assignment for l in lv if l.choices == s)
        stats.oracle_queries += miss_queries(accepted.total)
        if count_marked(lv).marked == 0:
            return None
        return _promise(tuple(clauses), list(y), r, frozenset(fixed), guard, stats)


def qfastball(inst: PbsInstance, params: FastBallParams | None = None, M: float = 0,
              qm: QubitModel = QubitModel(), seed: int = 0, within_ball: bool = True,
              stats: PbsStats | None = None) -> tuple[PbsResult, int]:
    """FastBall that switches to QBall for every subproblem of radius <= r_tilde(n, M).

    Returns the result and r_tilde."""
    params = params or FastBallParams()
    stats = stats if stats is not None else PbsStats()
    n = inst.formula.num_vars
    rt = r_tilde(n, M, qm) if M > 0 else 0
    if rt == 0:
        log.info("qubit budget %s below one QBall round at n=%d: plain FastBall", M, n)
        return fast_ball(inst, params, within_ball, stats), 0
    if inst.radius <= rt:
        stats.r_calls.append((inst.radius, "top"))
        res = qball_solve(inst.formula, inst.radius, seed, center=inst.center, stats=stats)
        return res, rt
    node = QBallLeaf(n, rt, derive_seed(seed, 1), "case2")
    prom = QBallLeaf(n, rt, derive_seed(seed, 2), "promise")
    res = fast_ball(inst, params, within_ball, stats, node_hook=node, promise_hook=prom)
    return res, rt


# -------------------------------------------------------- space splitting


def cover_for(n: int, rho, d: int):
    """Cover centers and PBS radius floor(rho n); a radius of n needs only one center."""
    rho = as_fraction(rho)
    r = math.floor(rho * n)
    if r >= n:
        return [(0,) * n], n
    return build_binary_cover(n, rho, d).centers, r


def pbs_call(inst: PbsInstance, strategy: Strategy, seed: int, stats: PbsStats, fb_params=None) -> PbsResult:
    kind = strategy.pbs
    if kind == "promise":
        return promise_ball(inst, stats=stats)
    if kind == "fastball":
        return fast_ball(inst, fb_params, stats=stats)
    if kind == "qball":
        return qball_solve(inst.formula, inst.radius, seed, center=inst.center, stats=stats)
    if kind == "qfastball":
        return qfastball(inst, fb_params, strategy.qubits, seed=seed, stats=stats)[0]
    if kind == "schoening":
        res = schoening_pbs(inst, seed, strategy.tries)
        stats.add(res.stats)
        return PbsResult(res.assignment, stats)
    raise ValueError(kind)


def space_split_solve(f: Formula, strategy: Strategy) -> SolveReport:
    t0 = time.perf_counter()
    n = f.num_vars
    centers, r = cover_for(n, strategy.rho, strategy.d)
    fb_params = FastBallParams(strategy.t, strategy.k) if strategy.pbs in ("fastball", "qfastball") else None
    rep = SolveReport("UNSAT", strategy=strategy.label)
    rep.extra.update(radius=r, centers=len(centers), rho=str(strategy.rho), d=strategy.d)
    if strategy.pbs == "qfastball":
        rep.extra["r_tilde"] = r_tilde(n, strategy.qubits) if strategy.qubits > 0 else 0
    st = PbsStats()
    for idx, c in enumerate(centers):
        rep.centers_tried += 1
        rep.pbs_calls += 1
        res = pbs_call(PbsInstance(f, c, r), strategy, derive_seed(strategy.seed, idx), st, fb_params)
        if res.found:
            rep.outcome, rep.assignment = "SAT", res.assignment
            break
    if rep.outcome == "UNSAT" and strategy.pbs == "schoening":
        rep.outcome = "UNKNOWN"
    rep.absorb(st)
    rep.extra["r_calls"] = sorted({rc for rc, _ in st.r_calls})
    rep.wall_time = time.perf_counter() - t0
    return rep


# ------------------------------------------------------- bottom-up hybrid


def grover_schoening_queries(m: int) -> int:
    """Modeled sub-solver cost on an m-variable residual: amplitude amplification of a
    walk that succeeds with probability (3/4)^m, run for its optimal schedule."""
    if m == 0:
        return 1
    theta = math.asin(math.sqrt(0.75**m))
    return 2 * math.floor(math.pi / (4 * theta)) + 1


def naive_bottom_up(f: Formula, m: int, seed: int = 0) -> SolveReport:
    """Enumerate the first n-m variables classically; each residual m-variable instance goes
    to the modeled quantum sub-solver (decided exactly, charged by the query model)."""
    n = f.num_vars
    if not 0 <= m <= n:
        raise ValueError(f"m={m} outside [0, {n}]")
    if n - m > 20:
        raise ValueError("n - m must be <= 20")
    t0 = time.perf_counter()
    k = n - m
    per = grover_schoening_queries(m)
    rep = SolveReport("UNSAT", strategy="naive")
    for p in range(1 << k):
        partial = [(v + 1) if (p >> v) & 1 else -(v + 1) for v in range(k)]
        residual = restrict_many(f, partial)
        rep.pbs_calls += 1
        rep.oracle_queries += per
        if any(len(c) == 0 for c in residual.clauses):
            continue
        sub = brute_force(residual)
        rep.clause_evals += sub.clause_evals
        if sub.outcome == "SAT":
            y = list(sub.assignment)
            for v in range(k):
                y[v] = (p >> v) & 1
            rep.outcome, rep.assignment = "SAT", tuple(y)
            break
    rep.extra.update(m=m, queries_per_residual=per, model_work=(1 << k) * per,
                     model_exponent=((k + math.log2(per)) / n) if n else 0.0,
                     formula_exponent=(k + GAMMA0 * m / 2) / n if n else 0.0)
    rep.wall_time = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------- dispatch


def solve(f: Formula, strategy: Strategy) -> SolveReport:
    if strategy.kind == "brute":
        rep = brute_force(f)
    elif strategy.kind == "schoening":
        rep = schoening(f, strategy.seed, strategy.tries)
    elif strategy.kind == "split":
        rep = space_split_solve(f, strategy)
    else:
        rep = naive_bottom_up(f, strategy.m, strategy.seed)
    if rep.outcome == "SAT" and not evaluate(f, rep.assignment):
        raise AssertionError(f"{strategy.label} returned a non-satisfying witness")
    return rep
