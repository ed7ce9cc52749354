"""Instance generators: uniform random 3-CNF, planted satisfiable, and certified UNSAT."""

from __future__ import annotations

import itertools
import random

from .cnf import Formula, evaluate


def random_clause(n: int, width: int, rng: random.Random) -> tuple[int, ...]:
    vs = rng.sample(range(1, n + 1), width)
    return tuple(v if rng.random() < 0.5 else -v for v in vs)


def random_3sat(n: int, num_clauses: int, rng: random.Random) -> Formula:
    width = min(3, n)
    return Formula.from_clauses(n, [random_clause(n, width, rng) for _ in range(num_clauses)])


def planted_3sat(n: int, num_clauses: int, rng: random.Random) -> tuple[Formula, tuple[int, ...]]:
    """Random clauses conditioned on a hidden assignment satisfying them."""
    width = min(3, n)
    planted = tuple(rng.randrange(2) for _ in range(n))
    clauses = []
    while len(clauses) < num_clauses:
        c = random_clause(n, width, rng)
        if any((planted[abs(l) - 1] == 1) == (l > 0) for l in c):
            clauses.append(c)
    return Formula.from_clauses(n, clauses), planted


def pigeonhole(pigeons: int, holes: int) -> Formula:
    """Pigeon i sits in hole j is variable (i-1)*holes + j.  Unsatisfiable when pigeons > holes."""
    if holes > 3:
        raise ValueError("pigeon clauses wider than 3")

    def var(i, j):
        return i * holes + j + 1

    clauses = [tuple(var(i, j) for j in range(holes)) for i in range(pigeons)]
    for j in range(holes):
        for a, b in itertools.combinations(range(pigeons), 2):
            clauses.append((-var(a, j), -var(b, j)))
    return Formula.from_clauses(pigeons * holes, clauses)


def is_satisfiable(f: Formula) -> bool:
    from .hybrid import brute_force

    return brute_force(f).outcome == "SAT"


def certified_unsat(n: int, rng: random.Random, density: float = 8.0, max_tries: int = 1000) -> Formula:
    """Dense random 3-CNF, resampled until brute force confirms unsatisfiability."""
    for _ in range(max_tries):
        f = random_3sat(n, max(1, round(density * n)), rng)
        if not is_satisfiable(f):
            return f
    raise RuntimeError(f"no UNSAT instance found in {max_tries} tries at n={n}, density={density}")


def agreement_suite(seed: int = 2024, n_random: int = 200, n_planted: int = 50, n_unsat: int = 20,
                    n_range=(6, 12)) -> list[tuple[str, Formula]]:
    """Mixed ensemble with n <= 12: random near the threshold, planted SAT, certified UNSAT."""
    rng = random.Random(seed)
    lo, hi = n_range
    out = []
    for idx in range(n_random):
        n = rng.randint(lo, hi)
        out.append((f"random{idx}", random_3sat(n, round(rng.uniform(3.5, 5.0) * n), rng)))
    for idx in range(n_planted):
        n = rng.randint(lo, hi)
        out.append((f"planted{idx}", planted_3sat(n, round(4.26 * n), rng)[0]))
    if n_unsat:
        out.append(("php4_3", pigeonhole(4, 3)))
        out.append(("x1_notx1", Formula.from_clauses(max(lo, 1), [(1,), (-1,)])))
    for idx in range(max(0, n_unsat - 2)):
        n = rng.randint(lo, min(hi, 10))
        out.append((f"unsat{idx}", certified_unsat(n, rng)))
    return out


def check_witness(f: Formula, y) -> bool:
    return y is not None and evaluate(f, y)
