"""Closed-form resource and runtime-exponent model.

Exponents are base-2 per variable: a runtime of 2^(e n) has exponent e.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, asdict

import mpmath

log = logging.getLogger(__name__)

GAMMA0 = math.log2(4 / 3)  # Schoening's random-walk exponent
F_COEFF = 1 - math.log2(math.sqrt(3))  # exponent gained per qubit-radius unit
DEFAULT_D = 15


def entropy(p: float) -> float:
    if not 0 <= p <= 1:
        raise ValueError(f"entropy argument {p} outside [0, 1]")
    if p in (0, 1):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def split_exponent(rho: float, zeta: float) -> float:
    """Exponent of space splitting with radius rho*n and a PBS solver costing 2^(zeta r)."""
    return 1 - entropy(rho) + zeta * rho


def optimal_rho(zeta: float) -> tuple[float, float]:
    """Minimizer of 1 - h(rho) + zeta*rho and the minimum; stationarity gives 1/(1+2^zeta)."""
    if zeta <= 0:
        raise ValueError("zeta must be > 0")
    rho = 1 / (1 + 2**zeta)
    return rho, split_exponent(rho, zeta)


def optimal_rho_numeric(zeta: float, lo: float = 0.01, hi: float = 0.49, tol: float = 1e-15) -> float:
    """Golden-section minimization of the split exponent in 40-digit arithmetic."""
    with mpmath.workdps(40):
        z = mpmath.mpf(zeta)

        def g(p):
            return 1 + p * mpmath.log(p, 2) + (1 - p) * mpmath.log(1 - p, 2) + z * p

        a, b = mpmath.mpf(lo), mpmath.mpf(hi)
        invphi = (mpmath.sqrt(5) - 1) / 2
        c, d = b - invphi * (b - a), a + invphi * (b - a)
        gc, gd = g(c), g(d)
        while b - a > tol:
            if gc < gd:
                b, d, gd = d, c, gc
                c = b - invphi * (b - a)
                gc = g(c)
            else:
                a, c, gc = c, d, gd
                d = a + invphi * (b - a)
                gd = g(d)
        return float((a + b) / 2)


# --------------------------------------------------------------- qubit model


@dataclass(frozen=True)
class QubitModel:
    A: float = 10.0
    B: float = 50.0
    C: float = 16.0

    def __post_init__(self):
        if min(self.A, self.B, self.C) <= 0:
            raise ValueError("A, B and C must be positive")


def qubit_count(n: int, r: int, qm: QubitModel = QubitModel()) -> float:
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    return qm.A * r * math.log(n / r) + qm.B * r + qm.C * math.log2(2 * n)


def r_tilde(n: int, M: float, qm: QubitModel = QubitModel()) -> int:
    """Largest r <= n with qubit_count(n, r) <= M; 0 when even r = 1 does not fit."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if qubit_count(n, 1, qm) > M:
        return 0
    lo, hi = 1, n  # qubit_count is increasing in r on [1, n]
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if qubit_count(n, mid, qm) <= M:
            lo = mid
        else:
            hi = mid - 1
    return lo


def r_tilde_slack(n: int, M: float, qm: QubitModel = QubitModel()) -> float:
    """C' with r_tilde = beta(M/n) n - C' log2 n."""
    if n < 2:
        raise ValueError("n must be >= 2")
    c = M / n
    beta = beta_of_c(c, qm) if 0 < c < qm.B else 1.0
    slack = (beta * n - r_tilde(n, M, qm)) / math.log2(n)
    log.info("r_tilde(n=%d, M=%s) slack C'=%.3f", n, M, slack)
    return slack


# ------------------------------------------------------------------ beta(c)


def _beta_equation(beta: float, qm: QubitModel) -> float:
    return qm.A * beta * math.log(1 / beta) + qm.B * beta


def _check_c(c: float, qm: QubitModel) -> None:
    top = _beta_equation(1.0, qm)
    if not 0 < c < top:
        raise ValueError(f"c={c} outside (0, {top})")


def beta_of_c(c: float, qm: QubitModel = QubitModel()) -> float:
    """Root of A beta ln(1/beta) + B beta = c on (0, 1] by bisection (the left side increases there)."""
    _check_c(c, qm)
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if mid == lo or mid == hi:
            break
        if _beta_equation(mid, qm) < c:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def lambert_w_lower(z: float, tol: float = 1e-16, max_iter: int = 100) -> float:
    """W_{-1}(z) for -1/e < z < 0 by Halley iteration from the log-series start."""
    if not -1 / math.e < z < 0:
        raise ValueError(f"W_-1 needs -1/e < z < 0, got {z}")
    if abs(z + 1 / math.e) < 1e-12:
        raise ValueError("argument within 1e-12 of the branch point -1/e")
    l1 = math.log(-z)
    l2 = math.log(-l1)
    w = l1 - l2 + l2 / l1
    if w > -1:  # near the branch point the series start lands on the wrong side
        w = -1 - math.sqrt(2 * (1 + math.e * z))
    for _ in range(max_iter):
        ew = math.exp(w)
        fw = w * ew - z
        denom = ew * (w + 1) - (w + 2) * fw / (2 * w + 2)
        step = fw / denom
        w -= step
        if abs(step) <= tol * (1 + abs(w)):
            break
    return w


def beta_closed_form(c: float, qm: QubitModel = QubitModel()) -> float:
    """beta = -c / (A W(-c e^(-B/A) / A)) on the lower branch W_{-1}."""
    _check_c(c, qm)
    z = -c * math.exp(-qm.B / qm.A) / qm.A
    return -c / (qm.A * lambert_w_lower(z))


def f_of_c(c: float, qm: QubitModel = QubitModel()) -> float:
    return F_COEFF * beta_of_c(c, qm)


# ---------------------------------------------------------------- exponents


def epsilon_overhead(eps: float) -> float:
    """Exponent penalty of a (2+eps)^r PBS solver inside optimal space splitting."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    return math.log2(1 + eps / 2) / 3


def dantsin_exponent() -> float:
    return optimal_rho(math.log2(3))[1]


def naive_exponent(mu: float) -> float:
    """Bottom-up hybrid with an m = mu n qubit-variable sub-solver."""
    if not 0 <= mu <= 1:
        raise ValueError("mu must lie in [0, 1]")
    return (1 - mu) + GAMMA0 * mu / 2


def threshold_ratio() -> float:
    """mu where the bottom-up hybrid exponent meets the classical one."""
    return (1 - GAMMA0) / (1 - GAMMA0 / 2)


@dataclass
class ExponentReport:
    gamma0: float
    rho: float
    eps: float
    epsilon: float
    c: float
    beta_c: float
    f_c: float
    schoening: float
    dantsin: float
    fastball_split: float
    qfastball_split: float
    threshold: float

    def to_dict(self) -> dict:
        return asdict(self)


def hybrid_exponent(c: float, eps: float, qm: QubitModel = QubitModel()) -> ExponentReport:
    epsilon = epsilon_overhead(eps)
    beta = beta_of_c(c, qm) if c > 0 else 0.0
    f = F_COEFF * beta
    rho, _ = optimal_rho(math.log2(2 + eps))
    return ExponentReport(
        gamma0=GAMMA0, rho=rho, eps=eps, epsilon=epsilon, c=c, beta_c=beta, f_c=f,
        schoening=GAMMA0, dantsin=dantsin_exponent(), fastball_split=GAMMA0 + epsilon,
        qfastball_split=GAMMA0 + epsilon - f, threshold=threshold_ratio(),
    )


# ------------------------------------------------------------ FastBall t(eps)


def fastball_base(t: int, k: int = 3) -> float:
    """Per-unit-radius growth 2 t^(2/Delta) of the FastBall recursion."""
    delta = t - 2 * (t // k)
    if delta < 1:
        raise ValueError(f"t={t}, k={k} has no positive step")
    return 2 * t ** (2 / delta)


def t_of_epsilon(eps: float, k: int = 3, t_max: int = 10**6) -> int:
    """Smallest t >= k whose FastBall base is at most 2 + eps."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    for t in range(k, t_max + 1):
        if fastball_base(t, k) <= 2 + eps:
            return t
    raise ValueError(f"no t <= {t_max} reaches base 2 + {eps}")


def t_slow_growth(n: int, k: int = 3) -> int:
    """The slowly growing alternative t = ceil(log_3 log_2 n), at least k."""
    if n < 2:
        return k
    return max(k, math.ceil(math.log(max(math.log2(n), 1.0), 3)))
