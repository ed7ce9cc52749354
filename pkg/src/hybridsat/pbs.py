"""Promise-Ball-SAT solvers: random walk, 3-way branching and covering-code branching.

A PBS instance asks for a satisfying assignment within Hamming distance r of a
center.  Every solver here reports ``Found(y)`` only for y inside that ball.

FastBall moves its center by whole code words in Case 2, so the balls of its
inner calls poke outside the top-level ball.  The ``within_ball`` guard keeps
the answer exact: candidates outside the top ball are rejected, and when a
node's center already satisfies F but lies outside the top ball, the search
branches on flipping back one of the variables that separate it from the top
center.  Any solution inside both balls must undo one of those flips, so the
guard preserves completeness.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional

from .cnf import Formula, clause_satisfied, hamming, evaluate
from .covering import ChoiceCode, build_choice_cover


@dataclass(frozen=True)
class PbsInstance:
    formula: Formula
    center: tuple[int, ...]
    radius: int

    def __post_init__(self):
        if len(self.center) != self.formula.num_vars:
            raise ValueError("center length does not match num_vars")
        if not 0 <= self.radius <= self.formula.num_vars:
            raise ValueError(f"radius {self.radius} outside [0, n]")
        object.__setattr__(self, "center", tuple(self.center))


@dataclass
class PbsStats:
    nodes: int = 0
    leaves: int = 0
    clause_evals: int = 0
    walk_steps: int = 0
    promise_calls: int = 0
    guard_branches: int = 0
    qball_calls: int = 0
    oracle_queries: int = 0
    r_calls: list = field(default_factory=list)

    def add(self, other: "PbsStats") -> None:
        for k, v in asdict(other).items():
            if k == "r_calls":
                self.r_calls.extend(v)
            else:
                setattr(self, k, getattr(self, k) + v)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class PbsResult:
    assignment: Optional[tuple[int, ...]]
    stats: PbsStats = field(default_factory=PbsStats)

    @property
    def found(self) -> bool:
        return self.assignment is not None


@dataclass
class FastBallParams:
    t: int = 3
    k: int = 3
    code: ChoiceCode = None

    def __post_init__(self):
        if self.code is None:
            self.code = build_choice_cover(self.k, self.t)
        if self.code.arity != self.k or self.code.word_length != self.t:
            raise ValueError("code shape does not match (k, t)")
        if self.delta < 1:
            raise ValueError(f"t={self.t}, k={self.k} gives step {self.delta} < 1")

    @property
    def delta(self) -> int:
        return self.t - 2 * (self.t // self.k)


def _first_unsat(clauses, x, stats: PbsStats) -> int:
    for j, c in enumerate(clauses):
        stats.clause_evals += 1
        if not clause_satisfied(c, x):
            return j
    return -1


def ball_scan(inst: PbsInstance) -> Optional[tuple[int, ...]]:
    """Reference oracle: first satisfying point of B_r(center) by increasing distance."""
    from itertools import combinations

    f, x = inst.formula, inst.center
    n = f.num_vars
    for d in range(inst.radius + 1):
        for flips in combinations(range(n), d):
            y = list(x)
            for i in flips:
                y[i] ^= 1
            if evaluate(f, y):
                return tuple(y)
    return None


# ------------------------------------------------------------------ Schoening


def schoening_walk(inst: PbsInstance, rng_seed: int = 0, max_steps: int | None = None,
                   stats: PbsStats | None = None) -> PbsResult:
    stats = stats if stats is not None else PbsStats()
    f = inst.formula
    rng = random.Random(rng_seed)
    steps = 3 * f.num_vars if max_steps is None else max_steps
    x = list(inst.center)
    for _ in range(steps + 1):
        j = _first_unsat(f.clauses, x, stats)
        if j < 0:
            if hamming(x, inst.center) <= inst.radius:
                return PbsResult(tuple(x), stats)
            return PbsResult(None, stats)
        clause = f.clauses[j]
        if not clause:
            return PbsResult(None, stats)
        lit = clause[rng.randrange(len(clause))]
        x[abs(lit) - 1] ^= 1
        stats.walk_steps += 1
    return PbsResult(None, stats)


def derive_seed(root: int, *path: int) -> int:
    """Deterministic child seed; stable across runs and platforms."""
    h = root & 0xFFFFFFFFFFFFFFFF
    for p in path:
        h = (h * 6364136223846793005 + 1442695040888963407 + p) & 0xFFFFFFFFFFFFFFFF
        h ^= h >> 29
    return h


def schoening_pbs(inst: PbsInstance, rng_seed: int = 0, repetitions: int | None = None) -> PbsResult:
    if repetitions is None:
        repetitions = 20 * 2**inst.radius
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    stats = PbsStats()
    for rep in range(repetitions):
        res = schoening_walk(inst, derive_seed(rng_seed, rep), stats=stats)
        stats.leaves += 1
        if res.found:
            return PbsResult(res.assignment, stats)
    return PbsResult(None, stats)


# --------------------------------------------------------------- PromiseBall


class _Guard:
    """Top-ball acceptance test shared by the recursive solvers."""

    def __init__(self, center, radius, enabled: bool):
        self.center = center
        self.radius = radius
        self.enabled = enabled

    def accepts(self, y) -> bool:
        return not self.enabled or hamming(y, self.center) <= self.radius

    def hopeless(self, y, r) -> bool:
        # B_r(y) misses the top ball entirely
        return self.enabled and hamming(y, self.center) > self.radius + r

    def pullbacks(self, y, fixed=()) -> list[int]:
        """Variables (1-based) where y has left the top center and are still free."""
        return [i + 1 for i, (a, b) in enumerate(zip(y, self.center)) if a != b and (i + 1) not in fixed]


# A leaf hook is called as hook(clauses, y, r, fixed, guard, stats) at every node.  It
# returns an assignment, None for a decided miss, or NotImplemented to let the
# classical recursion expand the node (its children consult the hook again).
LeafHook = Callable


def _restrict(clauses, lit):
    out = []
    for c in clauses:
        if lit in c:
            continue
        if -lit in c:
            c = tuple(l for l in c if l != -lit)
        out.append(c)
    return tuple(out)


def _promise(clauses, y, r, fixed, guard: _Guard, stats: PbsStats, hook=None, depth=0):
    stats.nodes += 1
    if hook is not None:
        res = hook(clauses, y, r, fixed, guard, stats)
        if res is not NotImplemented:
            stats.leaves += 1
            return res
    if any(len(c) == 0 for c in clauses):
        stats.leaves += 1
        return None
    j = _first_unsat(clauses, y, stats)
    if j < 0:
        if guard.accepts(y):
            stats.leaves += 1
            return tuple(y)
        if r <= 0:
            stats.leaves += 1
            return None
        # satisfied but outside the top ball: undo one departure from the top center
        branch = [(v if guard.center[v - 1] else -v) for v in guard.pullbacks(y, fixed)]
        stats.guard_branches += 1
    else:
        if r <= 0:
            stats.leaves += 1
            return None
        branch = sorted(clauses[j], key=abs)
    if guard.hopeless(y, r):
        stats.leaves += 1
        return None
    for lit in branch:
        v = abs(lit)
        y2 = list(y)
        y2[v - 1] = 1 if lit > 0 else 0
        res = _promise(_restrict(clauses, lit), y2, r - 1, fixed | {v}, guard, stats, hook, depth + 1)
        if res is not None:
            return res
    return None


def promise_ball(inst: PbsInstance, within_ball: bool = True, stats: PbsStats | None = None) -> PbsResult:
    """Deterministic 3-way branching on the first unsatisfied clause; at most 3^r leaves."""
    stats = stats if stats is not None else PbsStats()
    guard = _Guard(inst.center, inst.radius, within_ball)
    leaves_before, pulls_before = stats.leaves, stats.guard_branches
    stats.promise_calls += 1
    y = _promise(inst.formula.clauses, list(inst.center), inst.radius, frozenset(), guard, stats)
    if stats.guard_branches == pulls_before:
        assert stats.leaves - leaves_before <= 3**inst.radius
    return PbsResult(y, stats)


# ------------------------------------------------------------------ FastBall


def greedy_disjoint_unsat(clauses, x, k: int, stats: PbsStats) -> list[tuple[int, ...]]:
    """Maximal set of pairwise variable-disjoint width-k clauses unsatisfied by x, in clause order."""
    used = set()
    out = []
    for c in clauses:
        if len(c) != k:
            continue
        stats.clause_evals += 1
        if clause_satisfied(c, x):
            continue
        vs = {abs(l) for l in c}
        if used & vs:
            continue
        used |= vs
        out.append(c)
    return out


def flip_by_word(x, H, w) -> list[int]:
    """x[H, w]: in the i-th clause of H flip the variable of its w_i-th literal."""
    y = list(x)
    for clause, choice in zip(H, w):
        v = abs(clause[choice - 1])
        y[v - 1] ^= 1
    return y


class _FastBall:
    def __init__(self, f: Formula, params: FastBallParams, guard: _Guard, stats: PbsStats,
                 node_hook=None, promise_hook=None):
        self.f = f
        self.params = params
        self.guard = guard
        self.stats = stats
        self.node_hook = node_hook
        self.promise_hook = promise_hook
        for c in f.clauses:
            if len(c) > params.k:
                raise ValueError(f"clause {c} wider than k={params.k}")

    def run(self, x, r, depth=0):
        st = self.stats
        st.nodes += 1
        if self.node_hook is not None:
            res = self.node_hook(self.f.clauses, x, r, frozenset(), self.guard, st)
            if res is not NotImplemented:
                st.leaves += 1
                return res
        j = _first_unsat(self.f.clauses, x, st)
        if j < 0:
            if self.guard.accepts(x):
                st.leaves += 1
                return tuple(x)
            return self._pull_back(x, r, depth)
        if r <= 0 or self.guard.hopeless(x, r):
            st.leaves += 1
            return None
        k, t = self.params.k, self.params.t
        G = greedy_disjoint_unsat(self.f.clauses, x, k, st)
        if len(G) < t:
            return self._case1(x, r, G)
        H = G[:t]
        for w in self.params.code.words:
            res = self.run(flip_by_word(x, H, w), r - self.params.delta, depth + 1)
            if res is not None:
                return res
        return None

    def _case1(self, x, r, G):
        from itertools import product

        gvars = sorted({abs(l) for c in G for l in c})
        k = self.params.k
        for beta in product((0, 1), repeat=len(gvars)):
            clauses = self.f.clauses
            y = list(x)
            for v, b in zip(gvars, beta):
                lit = v if b else -v
                clauses = _restrict(clauses, lit)
                y[v - 1] = b
            # every width-k clause unsatisfied at x either meets G (and was shortened) or contradicts maximality
            for c in clauses:
                if len(c) == k and not clause_satisfied(c, x):
                    raise AssertionError(f"width-{k} clause {c} survived restriction by G")
            self.stats.promise_calls += 1
            res = _promise(clauses, y, r, frozenset(gvars), self.guard, self.stats, self.promise_hook)
            if res is not None:
                return res
        return None

    def _pull_back(self, x, r, depth):
        st = self.stats
        if r <= 0 or self.guard.hopeless(x, r):
            st.leaves += 1
            return None
        st.guard_branches += 1
        for v in self.guard.pullbacks(x):
            y = list(x)
            y[v - 1] ^= 1
            res = self.run(y, r - 1, depth + 1)
            if res is not None:
                return res
        return None


def fast_ball(inst: PbsInstance, params: FastBallParams | None = None, within_ball: bool = True,
              stats: PbsStats | None = None, node_hook=None, promise_hook=None) -> PbsResult:
    params = params or FastBallParams()
    stats = stats if stats is not None else PbsStats()
    guard = _Guard(inst.center, inst.radius, within_ball)
    fb = _FastBall(inst.formula, params, guard, stats, node_hook, promise_hook)
    y = fb.run(list(inst.center), inst.radius)
    if y is not None:
        assert evaluate(inst.formula, y)
        assert not within_ball or hamming(y, inst.center) <= inst.radius
    return PbsResult(y, stats)


def leaf_bound(params: FastBallParams, r: int) -> int:
    """(t^2 2^Delta)^ceil(r/Delta), the per-level leaf bound of the Case-2 recursion."""
    d = params.delta
    return (params.t**2 * 2**d) ** (-(-r // d))
