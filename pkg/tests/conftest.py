import random

import pytest
from hypothesis import strategies as st

from hybridsat.cnf import Formula


@st.composite
def formulas(draw, min_vars=1, max_vars=8, max_clauses=20, max_width=3):
    n = draw(st.integers(min_vars, max_vars))
    L = draw(st.integers(0, max_clauses))
    clauses = []
    for _ in range(L):
        w = draw(st.integers(1, min(max_width, n)))
        vs = draw(st.lists(st.integers(1, n), min_size=w, max_size=w, unique=True))
        signs = draw(st.lists(st.booleans(), min_size=w, max_size=w))
        clauses.append(tuple(v if s else -v for v, s in zip(vs, signs)))
    return Formula.from_clauses(n, clauses)


@st.composite
def pbs_cases(draw, max_vars=10, max_radius=4):
    f = draw(formulas(min_vars=2, max_vars=max_vars, max_clauses=30))
    center = tuple(draw(st.lists(st.integers(0, 1), min_size=f.num_vars, max_size=f.num_vars)))
    r = draw(st.integers(0, min(max_radius, f.num_vars)))
    return f, center, r


@pytest.fixture
def rng():
    return random.Random(12345)


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("abc")), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
