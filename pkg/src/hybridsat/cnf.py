"""Formulas, assignments and the handful of transformations the solvers need.

Literals are stored DIMACS style: ``+v`` for x_v and ``-v`` for its negation,
with 1-based variable indices.  Indices in ``(n, 2n]`` are dummy variables: they
may appear in flip sets but never in clauses.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

log = logging.getLogger(__name__)

Clause = tuple[int, ...]
Assignment = tuple[int, ...]


class DimacsError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class Literal(NamedTuple):
    variable_index: int
    negated: bool = False

    @classmethod
    def from_int(cls, lit: int) -> "Literal":
        if lit == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(lit), lit < 0)

    def to_int(self) -> int:
        return -self.variable_index if self.negated else self.variable_index

    def __neg__(self) -> "Literal":
        return Literal(self.variable_index, not self.negated)


def _as_int(lit) -> int:
    return lit.to_int() if isinstance(lit, Literal) else int(lit)


@dataclass(frozen=True)
class Formula:
    num_vars: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("a formula needs at least one variable")
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        for c in clauses:
            seen = set()
            for lit in c:
                v = abs(lit)
                if lit == 0 or v > self.num_vars:
                    raise ValueError(f"literal {lit} outside 1..{self.num_vars}")
                if v in seen:
                    raise ValueError(f"variable {v} repeated in clause {c}")
                seen.add(v)
        object.__setattr__(self, "clauses", clauses)

    @classmethod
    def from_clauses(cls, num_vars: int, clauses: Iterable[Iterable]) -> "Formula":
        return cls(num_vars, tuple(tuple(_as_int(l) for l in c) for c in clauses))

    @property
    def width(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def has_empty_clause(self) -> bool:
        return any(len(c) == 0 for c in self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)


def clause_satisfied(clause: Clause, x: Sequence[int]) -> bool:
    for lit in clause:
        if (x[lit - 1] == 1) if lit > 0 else (x[-lit - 1] == 0):
            return True
    return False


def first_unsatisfied(f: Formula, x: Sequence[int]) -> int:
    """Index of the lowest-numbered clause falsified by ``x``, or -1."""
    for j, c in enumerate(f.clauses):
        if not clause_satisfied(c, x):
            return j
    return -1


def evaluate(f: Formula, x: Sequence[int]) -> bool:
    if len(x) != f.num_vars:
        raise ValueError(f"assignment has {len(x)} bits, formula has {f.num_vars} variables")
    return first_unsatisfied(f, x) < 0


def restrict(f: Formula, lit) -> Formula:
    """F restricted to ``lit = 1``: satisfied clauses dropped, the opposite literal deleted."""
    lit = _as_int(lit)
    out = []
    for c in f.clauses:
        if lit in c:
            continue
        if -lit in c:
            c = tuple(l for l in c if l != -lit)
        out.append(c)
    return Formula(f.num_vars, tuple(out))


def restrict_many(f: Formula, lits: Iterable) -> Formula:
    for lit in lits:
        f = restrict(f, lit)
    return f


def subsume_center(f: Formula, x: Sequence[int]) -> Formula:
    """Negate every literal on a variable that ``x`` sets to 1, so the result at 0...0 equals F(x)."""
    if len(x) != f.num_vars:
        raise ValueError("center length does not match num_vars")
    clauses = tuple(tuple(-l if x[abs(l) - 1] else l for l in c) for c in f.clauses)
    return Formula(f.num_vars, clauses)


def flip_set(x: Sequence[int], v: Iterable[int]) -> Assignment:
    """Flip the listed 1-based positions of ``x``; dummy indices beyond ``len(x)`` are ignored."""
    y = list(x)
    n = len(y)
    for i in v:
        if i < 1:
            raise ValueError(f"variable index {i} < 1")
        if i <= n:
            y[i - 1] ^= 1
    return tuple(y)


def hamming(x: Sequence[int], y: Sequence[int]) -> int:
    return sum(a != b for a, b in zip(x, y))


def bits_from_int(value: int, n: int) -> Assignment:
    """Assignment whose bit for x_i is bit (i-1) of ``value``."""
    return tuple((value >> i) & 1 for i in range(n))


def assignment_str(x: Sequence[int]) -> str:
    return "".join(str(b) for b in x)


def parse_assignment(s: str) -> Assignment:
    if not set(s) <= {"0", "1"}:
        raise ValueError(f"not a bit string: {s!r}")
    return tuple(int(c) for c in s)


_HEADER = re.compile(r"^p\s+cnf\s+(\d+)\s+(\d+)\s*$")


def parse_dimacs(text: str, max_width: int = 3) -> Formula:
    num_vars = None
    declared = None
    clauses: list[Clause] = []
    current: list[int] = []
    current_line = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError("duplicate problem line", lineno)
            m = _HEADER.match(line)
            if not m:
                raise DimacsError(f"malformed problem line {line!r}", lineno)
            num_vars, declared = int(m.group(1)), int(m.group(2))
            if num_vars < 1:
                raise DimacsError("need at least one variable", lineno)
            continue
        if num_vars is None:
            raise DimacsError("clause before problem line", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"bad token {tok!r}", lineno) from None
            if lit == 0:
                clauses.append(_finish_clause(current, max_width, current_line or lineno))
                current, current_line = [], None
                continue
            if abs(lit) > num_vars:
                raise DimacsError(f"variable {abs(lit)} exceeds declared {num_vars}", lineno)
            current_line = current_line or lineno
            current.append(lit)
    if current:
        clauses.append(_finish_clause(current, max_width, current_line))
    if num_vars is None:
        raise DimacsError("missing problem line")
    if declared != len(clauses):
        # common in the wild; the clause list is authoritative
        log.debug("header declares %d clauses, found %d", declared, len(clauses))
    return Formula(num_vars, tuple(clauses))


def _finish_clause(lits: list[int], max_width: int, lineno: int) -> Clause:
    out: list[int] = []
    for lit in lits:
        if -lit in out:
            raise DimacsError(f"complementary literals {abs(lit)} and {-abs(lit)} in one clause", lineno)
        if lit not in out:
            out.append(lit)
    if not out:
        raise DimacsError("empty clause", lineno)
    if len(out) > max_width:
        raise DimacsError(f"clause width {len(out)} exceeds {max_width}", lineno)
    return tuple(out)


def to_dimacs(f: Formula, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"c {part}" for part in comment.splitlines())
    lines.append(f"p cnf {f.num_vars} {len(f.clauses)}")
    lines.extend(" ".join(str(l) for l in c) + " 0" for c in f.clauses)
    return "\n".join(lines) + "\n"


def canonical(f: Formula) -> str:
    """One-line normal form used by golden tests: literals sorted by variable within a clause."""
    body = ";".join(",".join(str(l) for l in sorted(c, key=abs)) for c in f.clauses)
    return f"n={f.num_vars}|{body}"
