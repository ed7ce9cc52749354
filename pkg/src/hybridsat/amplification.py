"""Exact model of amplitude amplification over the choice register of QBall.

The circuits are classical-reversible, so a Grover iteration acts on the
two-dimensional span of the uniform superpositions over marked and unmarked
choice vectors.  Knowing the marked count m out of N = 3^r therefore gives the
success probability exactly; nothing larger than a 2x2 rotation is simulated.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .cnf import Formula, evaluate, flip_set, subsume_center
from .pbs import PbsResult, PbsStats
from .qball.reference import reference_rounds

MAX_CHOICES = 10**6
RETRY_CAP = 64


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class MarkedCount:
    total: int
    marked: int
    marked_vectors: tuple = ()

    def __post_init__(self):
        if not 0 <= self.marked <= self.total:
            raise ValueError(f"marked={self.marked} outside [0, {self.total}]")


@dataclass(frozen=True)
class AmplificationPlan:
    iterations: int
    success_prob: float
    oracle_queries: int


@dataclass(frozen=True)
class Leaf:
    """One choice vector with the point it reaches and whether F holds there."""

    choices: tuple[int, ...]
    flips: tuple[int, ...]
    assignment: tuple[int, ...]
    satisfied: bool


def choice_vectors(r: int):
    return itertools.product((1, 2, 3), repeat=r)


def _check_budget(r: int, budget: int) -> None:
    if 3**r > budget:
        raise BudgetExceeded(f"3^{r} choice vectors exceed the budget {budget}")


def leaves(f: Formula, r: int, center: Sequence[int] | None = None, mode: str = "reference",
           budget: int = MAX_CHOICES) -> list[Leaf]:
    """Every choice vector's flip set V(s) and the resulting point, in lexicographic s order."""
    _check_budget(r, budget)
    n = f.num_vars
    center = tuple(center) if center is not None else (0,) * n
    g = subsume_center(f, center)
    if mode == "reference":
        out = []
        for s in choice_vectors(r):
            v = tuple(sorted(reference_rounds(g, s)))
            y = flip_set(center, v)
            out.append(Leaf(s, v, y, evaluate(f, y)))
        return out
    if mode == "circuit":
        return _circuit_leaves(f, g, r, center)
    raise ValueError(f"unknown mode {mode!r}")


def _circuit_leaves(f, g, r, center):
    if r == 0:
        return [Leaf((), (), tuple(center), evaluate(f, center))]
    from .qball.builder import QBallBuilder

    b = QBallBuilder(g, r)
    m = b.machine()
    q1, q2 = b.build_qball1(), b.build_qball2()
    out = []
    for s in choice_vectors(r):
        t = b.tape_for(s)
        m.run(q1, t)
        m.run(q2, t)
        v = tuple(b.read_effenc(t))
        out.append(Leaf(s, v, flip_set(center, v), bool(t[b.sat.slot])))
    return out


def count_marked(lv: list[Leaf], accept: Callable | None = None) -> MarkedCount:
    marked = tuple(l.choices for l in lv if l.satisfied and (accept is None or accept(l.assignment)))
    return MarkedCount(len(lv), len(marked), marked)


def enumerate_marked(f: Formula, r: int, mode: str = "reference", center: Sequence[int] | None = None,
                     accept: Callable | None = None, budget: int = MAX_CHOICES) -> MarkedCount:
    """m = #{s : F(center xor V(s)) = 1}, counted by the reference map or by running the circuits."""
    return count_marked(leaves(f, r, center, mode, budget), accept)


# ------------------------------------------------------------------- Grover


def grover_success(mc: MarkedCount, k: int) -> float:
    if k < 0:
        raise ValueError("iterations must be >= 0")
    if mc.marked == 0:
        return 0.0
    theta = math.asin(math.sqrt(mc.marked / mc.total))
    return math.sin((2 * k + 1) * theta) ** 2


def rotation_success(marked: int, total: int, k: int) -> float:
    """Same quantity by applying oracle and diffusion reflections k times to the
    (marked, unmarked) amplitude pair."""
    if marked == 0:
        return 0.0
    a0 = math.sqrt(marked / total)
    b0 = math.sqrt(1 - marked / total)
    a, b = a0, b0
    for _ in range(k):
        a = -a  # oracle
        ip = a * a0 + b * b0  # reflect about the initial state
        a, b = 2 * ip * a0 - a, 2 * ip * b0 - b
    return a * a


def optimal_iterations(mc: MarkedCount) -> Optional[AmplificationPlan]:
    if mc.marked == 0:
        return None
    theta = math.asin(math.sqrt(mc.marked / mc.total))
    k = math.floor(math.pi / (4 * theta))
    return AmplificationPlan(k, grover_success(mc, k), 2 * k + 1)


def miss_queries(total: int) -> int:
    """Queries spent before concluding that nothing is marked: one full schedule for m = 1."""
    return 2 * math.floor(math.pi / 4 * math.sqrt(total)) + 1


def sample_marked(mc: MarkedCount, rng: random.Random, stats: PbsStats) -> tuple:
    """Run the optimal schedule until a measurement lands on a marked vector."""
    plan = optimal_iterations(mc)
    for _ in range(RETRY_CAP):
        stats.oracle_queries += plan.oracle_queries
        if rng.random() < plan.success_prob:
            return mc.marked_vectors[rng.randrange(mc.marked)]
    raise BudgetExceeded(f"no marked outcome after {RETRY_CAP} amplification rounds")


def qball_solve(f: Formula, r: int, rng_seed: int = 0, center: Sequence[int] | None = None,
                accept: Callable | None = None, mode: str = "reference", budget: int = MAX_CHOICES,
                stats: PbsStats | None = None) -> PbsResult:
    """PBS through QBall: Found(center xor V(s)) for a sampled marked s, or NotFound when m = 0."""
    stats = stats if stats is not None else PbsStats()
    stats.qball_calls += 1
    lv = leaves(f, r, center, mode, budget)
    mc = count_marked(lv, accept)
    if mc.marked == 0:
        stats.oracle_queries += miss_queries(mc.total)
        return PbsResult(None, stats)
    s = sample_marked(mc, random.Random(rng_seed), stats)
    leaf = next(l for l in lv if l.choices == s)
    return PbsResult(leaf.assignment, stats)
