"""Plain (non-reversible) models of everything the QBall circuits compute.

These are the independent oracles the reversible programs are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from ..cnf import Formula, clause_satisfied

SEP = 2


@dataclass(frozen=True)
class SetCode:
    trits: tuple[int, ...]
    k: int
    capacity: int

    def decode(self) -> list[int]:
        return decode_set(self.trits)


def encode_set(s: Sequence[int], n: int | None = None) -> list[int]:
    """Difference encoding: y1, y2-y1, ... each in binary without leading zeros, then a separator."""
    out: list[int] = []
    prev = 0
    for y in s:
        if y <= prev:
            raise ValueError(f"set must be strictly increasing and positive: {list(s)}")
        if n is not None and y > 2 * n:
            raise ValueError(f"element {y} exceeds 2n = {2 * n}")
        out.extend(int(b) for b in bin(y - prev)[2:])
        out.append(SEP)
        prev = y
    return out


def decode_set(trits: Sequence[int]) -> list[int]:
    out = []
    acc = 0
    digits = 0
    total = 0
    for tr in trits:
        if tr == SEP:
            if digits == 0:
                raise ValueError("empty number before separator")
            total += acc
            out.append(total)
            acc = digits = 0
        elif tr in (0, 1):
            acc = 2 * acc + tr
            digits += 1
        else:
            raise ValueError(f"not a trit: {tr}")
    if acc:
        raise ValueError("digits after the last separator")
    return out


def encoded_length(s: Sequence[int]) -> int:
    return len(encode_set(s))


@lru_cache(maxsize=None)
def set_capacity(k: int, max_value: int) -> int:
    """Longest encoding of any k-element subset of {1..max_value}.

    Exact maximum of sum(bitlen(d_j) + 1) over k positive gaps summing to at
    most max_value, computed by dynamic programming.
    """
    if k == 0:
        return 0
    if k > max_value:
        raise ValueError(f"{k} distinct elements do not fit below {max_value}")
    neg = -(10**9)
    # best[j][s]: max digit total using j gaps with sum exactly s
    best = [[neg] * (max_value + 1) for _ in range(k + 1)]
    best[0][0] = 0
    for j in range(1, k + 1):
        prev, cur = best[j - 1], best[j]
        for s in range(j, max_value + 1):
            m = neg
            for d in range(1, s - (j - 1) + 1):
                v = prev[s - d]
                if v > neg:
                    v += d.bit_length()
                    if v > m:
                        m = v
            cur[s] = m
    return max(best[k]) + k


def effenc_blocks(i: int) -> list[int]:
    """Block sizes of the efficient encoding after i rounds: powers of two, largest first."""
    if i < 0:
        raise ValueError("i must be >= 0")
    return [1 << l for l in range(i.bit_length() - 1, -1, -1) if (i >> l) & 1]


def effenc_partition(v: Sequence[int]) -> list[list[int]]:
    """Split the ordered list v_1..v_i into the blocks of the efficient encoding, each sorted."""
    out = []
    pos = 0
    for size in effenc_blocks(len(v)):
        out.append(sorted(v[pos:pos + size]))
        pos += size
    return out


def trailing_zeros(i: int) -> int:
    return (i & -i).bit_length() - 1


def merge_schedule(i: int) -> list[tuple[int, tuple[int, int], tuple[int, int]]]:
    """Unions performed when element i joins: (level l, rounds of S1, rounds of S2)."""
    out = []
    for l in range(trailing_zeros(i)):
        s1 = (i - 2 ** (l + 1) + 1, i - 2**l)
        s2 = (i - 2**l + 1, i)
        out.append((l, s1, s2))
    return out


# ------------------------------------------------------------- V(s) rounds


def x_of(v: Sequence[int], n: int) -> tuple[int, ...]:
    x = [0] * n
    for i in v:
        if 1 <= i <= n:
            x[i - 1] = 1
    return tuple(x)


def first_unsat_clause(f: Formula, x) -> int:
    for j, c in enumerate(f.clauses):
        if not clause_satisfied(c, x):
            return j
    return -1


def select_variable(clause: Sequence[int], chosen, s: int, dummy: int) -> int:
    """s-th smallest clause variable not yet chosen, or the dummy when too few remain."""
    free = sorted(abs(l) for l in clause if abs(l) not in chosen)
    return free[s - 1] if 1 <= s <= len(free) else dummy


def calculate_reference(f: Formula, v_prev: Sequence[int], s_i: int, i: int) -> int:
    n = f.num_vars
    x = x_of(v_prev, n)
    j = first_unsat_clause(f, x)
    if j < 0:
        return n + i
    return select_variable(f.clauses[j], set(v_prev), s_i, n + i)


def reference_rounds(f: Formula, s: Sequence[int]) -> list[int]:
    """v_1..v_r in round order for choices s_i in {1,2,3}; f already centered at 0...0."""
    v: list[int] = []
    for i, si in enumerate(s, 1):
        v.append(calculate_reference(f, v, si, i))
    return v


def reference_V(f: Formula, s: Sequence[int]) -> list[int]:
    return sorted(reference_rounds(f, s))


def reference_marked(f: Formula, s: Sequence[int]) -> bool:
    from ..cnf import evaluate

    return evaluate(f, x_of(reference_rounds(f, s), f.num_vars))


def clause_value(clause: Sequence[int], v: Sequence[int], n: int) -> int:
    return int(clause_satisfied(clause, x_of(v, n)))
