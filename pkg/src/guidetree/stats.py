"""Statistics for comparing trial groups.

Implements the two-sided Welch unequal-variance t-test from first
principles: the p-value comes from the regularized incomplete beta
function, evaluated with a continued fraction (modified Lentz scheme),
so the package needs no numerical dependency at runtime. Summation uses
math.fsum throughout, which makes every result independent of input
order down to the last bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Sequence

_BETACF_MAX_ITER = 500
_BETACF_EPS = 1e-16
_BETACF_FPMIN = 1e-300


class ConvergenceError(ArithmeticError):
    """The continued fraction failed to converge (out-of-range inputs)."""


class DegenerateSampleError(ValueError):
    """Samples too small or jointly constant; the t statistic is undefined."""


def mean(values: Sequence[float]) -> float:
    if not values:
        raise ValueError("mean of empty sequence")
    return math.fsum(values) / len(values)


def sample_variance(values: Sequence[float]) -> float:
    """Unbiased variance (n - 1 denominator)."""
    n = len(values)
    if n < 2:
        raise ValueError("sample variance needs at least two values")
    m = mean(values)
    return math.fsum((v - m) ** 2 for v in values) / (n - 1)


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_FPMIN:
        d = _BETACF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ConvergenceError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    front = math.exp(
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x))
    # The continued fraction converges fast only on one side of the mean;
    # use the symmetry I_x(a, b) = 1 - I_{1-x}(b, a) for the other side.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t distribution."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_value: float
    mean_a: float
    mean_b: float
    var_a: float
    var_b: float
    n_a: int
    n_b: int


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """Two-sided Welch t-test for independent samples with unequal variances.

    Requires at least two observations per group and a nonzero variance in
    at least one group; otherwise the statistic is undefined and a
    DegenerateSampleError is raised.
    """
    n_a, n_b = len(a), len(b)
    if n_a < 2 or n_b < 2:
        raise DegenerateSampleError("each group needs at least two observations")
    mean_a, mean_b = mean(a), mean(b)
    var_a, var_b = sample_variance(a), sample_variance(b)
    se_a = var_a / n_a
    se_b = var_b / n_b
    se = math.sqrt(se_a + se_b)
    if se == 0.0:
        raise DegenerateSampleError("both samples are constant")
    t = (mean_a - mean_b) / se
    # Welch-Satterthwaite, written with the normalized weight r_a + r_b = 1
    # so that squaring never underflows even for denormal variances.
    r_a = se_a / (se_a + se_b)
    r_b = se_b / (se_a + se_b)
    df = 1.0 / (r_a ** 2 / (n_a - 1) + r_b ** 2 / (n_b - 1))
    p = student_t_sf2(t, df)
    return WelchResult(
        t=t, df=df, p_value=p,
        mean_a=mean_a, mean_b=mean_b,
        var_a=var_a, var_b=var_b,
        n_a=n_a, n_b=n_b)


def bonferroni_threshold(alpha: float, comparisons: int) -> float:
    """Per-comparison significance threshold controlling family-wise error."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if comparisons < 1:
        raise ValueError("comparisons must be at least 1")
    return alpha / comparisons


def sample_size_per_group(alpha: float, power: float, delta: float, sd: float) -> int:
    """Observations per group for a two-sided two-sample comparison of means.

    Normal-approximation formula n = 2 (z_{1-alpha/2} + z_power)^2 sd^2 / delta^2,
    rounded up, never below 2. Other planning methods can state smaller
    counts for the same inputs; this one is deliberately conservative.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0.0 < power < 1.0:
        raise ValueError("power must lie in (0, 1)")
    if delta <= 0 or sd <= 0:
        raise ValueError("delta and sd must be positive")
    z_alpha = NormalDist().inv_cdf(1.0 - alpha / 2.0)
    z_power = NormalDist().inv_cdf(power)
    n = 2.0 * (z_alpha + z_power) ** 2 * (sd / delta) ** 2
    return max(2, math.ceil(n))
