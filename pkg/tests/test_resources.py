import math
import random

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from hybridsat.cnf import Formula
from hybridsat.qball.builder import QBallBuilder
from hybridsat.resources import (
    F_COEFF, GAMMA0, QubitModel, beta_closed_form, beta_of_c, dantsin_exponent, entropy, epsilon_overhead,
    f_of_c, fastball_base, hybrid_exponent, lambert_w_lower, naive_exponent, optimal_rho,
    optimal_rho_numeric, qubit_count, r_tilde, r_tilde_slack, split_exponent, t_of_epsilon, t_slow_growth,
    threshold_ratio,
)

QM = QubitModel()


def test_entropy_examples():
    assert entropy(0.5) == 1.0
    assert entropy(0) == entropy(1) == 0.0
    with mpmath.workdps(30):
        third = mpmath.mpf(1) / 3
        exact = -third * mpmath.log(third, 2) - (1 - third) * mpmath.log(1 - third, 2)
    assert entropy(1 / 3) == pytest.approx(float(exact), abs=1e-15)
    assert entropy(1 / 3) == pytest.approx(math.log2(3) - 2 / 3, abs=1e-15)
    with pytest.raises(ValueError):
        entropy(1.2)


def test_gamma0():
    assert 0.4150 < GAMMA0 < 0.4151
    assert abs(GAMMA0 - 0.415037499) < 1e-9


def test_optimal_rho_examples():
    rho, e = optimal_rho(1)
    assert rho == pytest.approx(1 / 3, abs=1e-15) and e == pytest.approx(GAMMA0, abs=1e-12)
    rho, e = optimal_rho(math.log2(3))
    assert rho == pytest.approx(0.25, abs=1e-15) and abs(e - 0.585) < 0.001
    with pytest.raises(ValueError):
        optimal_rho(0)


def test_optimal_rho_numeric_agrees():
    rng = random.Random(17)
    for zeta in [1, math.log2(3)] + [rng.uniform(0.2, 4) for _ in range(20)]:
        assert abs(optimal_rho(zeta)[0] - optimal_rho_numeric(zeta)) < 1e-9


@settings(max_examples=100)
@given(st.floats(0.1, 5), st.floats(0.02, 0.48))
def test_optimal_rho_is_minimum(zeta, rho):
    assert split_exponent(rho, zeta) >= optimal_rho(zeta)[1] - 1e-12


def test_qubit_count_examples():
    assert qubit_count(16, 3) == pytest.approx(10 * 3 * math.log(16 / 3) + 150 + 16 * 5)
    with pytest.raises(ValueError):
        qubit_count(5, 6)
    with pytest.raises(ValueError):
        QubitModel(C=0)
    t10 = 10 * 10 * math.log(100) + 50 * 10
    t20 = 10 * 20 * math.log(50) + 50 * 20
    assert 1.7 < t20 / t10 < 2.0


@pytest.mark.parametrize("n", [5, 20, 100, 1000])
def test_qubit_count_monotone(n):
    vals = [qubit_count(n, r) for r in range(1, n + 1)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_measured_cells_within_model():
    rng = random.Random(6)
    for n in range(12, 41, 4):
        f = Formula.from_clauses(n, [tuple(rng.sample(range(1, n + 1), 3)) for _ in range(4 * n)])
        for r in range(1, 6):
            assert QBallBuilder(f, r).layout.qubits <= qubit_count(n, r)


def test_r_tilde():
    assert r_tilde(16, qubit_count(16, 5)) == 5
    assert r_tilde(16, qubit_count(16, 1) - 1) == 0
    n, M = 10**4, 0.1 * 10**4
    linear = max((r for r in range(1, n + 1) if qubit_count(n, r) <= M), default=0)
    assert r_tilde(n, M) == linear
    assert r_tilde(10, 10**9) == 10


def test_r_tilde_slack_is_logged(caplog):
    caplog.set_level("INFO")
    slack = r_tilde_slack(1000, 5000)
    assert "slack" in caplog.text
    assert 0 <= slack < 20
    n = 1000
    assert r_tilde(n, 5000) >= beta_of_c(5.0) * n - slack * math.log2(n) - 1e-9


def test_beta_examples():
    b = beta_of_c(0.1)
    assert abs(10 * b * math.log(1 / b) + 50 * b - 0.1) <= 1e-9
    assert abs(b - beta_closed_form(0.1)) <= 1e-12
    assert beta_of_c(1e-9) < 1e-10
    for bad in (0, -1, 50, 60):
        with pytest.raises(ValueError):
            beta_of_c(bad)


def test_beta_dual_computation():
    for i in range(1, 51):
        c = i / 100
        assert abs(beta_of_c(c) - beta_closed_form(c)) < 1e-9


def test_lambert_w_lower():
    for z in (-0.3, -0.1, -1e-3, -1e-8, -1 / math.e + 1e-6):
        w = lambert_w_lower(z)
        assert w <= -1 and abs(w * math.exp(w) - z) < 1e-12
        assert w == pytest.approx(float(mpmath.lambertw(z, -1).real), rel=1e-9)
    for bad in (0.1, -0.5, -1 / math.e):
        with pytest.raises(ValueError):
            lambert_w_lower(bad)


def test_f_of_c():
    assert F_COEFF == pytest.approx(0.2075187496, abs=1e-9)
    for c in (0.01, 0.2, 0.5, 3):
        assert f_of_c(c) / beta_of_c(c) == pytest.approx(F_COEFF, rel=1e-12)
    vals = [f_of_c(c / 100) for c in range(1, 200)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert f_of_c(1e-12) < 1e-12


def test_hybrid_exponent_report():
    rep = hybrid_exponent(0.0, 0.0)
    assert rep.qfastball_split == pytest.approx(GAMMA0)
    assert rep.dantsin == pytest.approx(dantsin_exponent()) and abs(rep.dantsin - 0.585) < 0.001
    rep = hybrid_exponent(0.2, 0.1)
    assert rep.f_c == pytest.approx(F_COEFF * rep.beta_c)
    assert rep.fastball_split == pytest.approx(GAMMA0 + epsilon_overhead(0.1))
    assert set(rep.to_dict()) >= {"gamma0", "rho", "epsilon", "c", "beta_c", "f_c"}


def test_no_threshold_grid():
    for i in range(1, 51):
        c = i / 100
        f = f_of_c(c)
        for frac in (0.0, 0.25, 0.5, 0.9):
            eps = 2 * (2 ** (3 * f * frac) - 1)  # makes epsilon_overhead = frac * f
            rep = hybrid_exponent(c, eps)
            assert rep.epsilon < f
            assert rep.qfastball_split < GAMMA0


def test_threshold_ratio():
    mu = threshold_ratio()
    assert abs(mu - 0.7381) <= 1e-4
    assert round(mu, 2) == 0.74
    assert naive_exponent(mu) == pytest.approx(GAMMA0, abs=1e-12)
    assert naive_exponent(mu + 0.01) < GAMMA0 < naive_exponent(mu - 0.01)
    with pytest.raises(ValueError):
        naive_exponent(1.5)


def test_epsilon_and_fastball_base():
    assert epsilon_overhead(0) == 0
    with pytest.raises(ValueError):
        epsilon_overhead(-1)
    assert fastball_base(3) == 18
    assert fastball_base(6) == 2 * 6
    t = t_of_epsilon(1.0)
    assert t >= 3 and fastball_base(t) <= 3
    assert all(fastball_base(u) > 3 for u in range(3, t) if u - 2 * (u // 3) >= 1)
    with pytest.raises(ValueError):
        t_of_epsilon(0)
    assert t_slow_growth(2) == 3 and t_slow_growth(10**30) == 5
