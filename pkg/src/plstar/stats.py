"""Descriptive statistics and the hypothesis tests used by the experiment
harness, implemented from first principles.

The Student-t CDF is evaluated through the regularized incomplete beta
function (Lentz continued fraction), so the package needs no numerical
library.  p-values are clamped to [1e-300, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

P_MIN = 1e-300


class EmptySeries(ValueError):
    pass


class SingletonSeries(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class ZeroVariance(ValueError):
    pass


class ZeroVarianceDifferences(ZeroVariance):
    pass


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    df: float
    kind: str


def _mean(xs) -> float:
    return sum(xs) / len(xs)


def _sample_variance(xs) -> float:
    m = _mean(xs)
    return sum((x - m) ** 2 for x in xs) / (len(xs) - 1)


def describe(xs) -> tuple[float, float]:
    """(mean, sample standard deviation) with the n-1 denominator."""
    if len(xs) == 0:
        raise EmptySeries("cannot describe an empty series")
    if len(xs) == 1:
        raise SingletonSeries("standard deviation requires at least 2 values")
    return _mean(xs), math.sqrt(_sample_variance(xs))


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta (Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    return h  # converged to machine precision long before 400 terms in practice


def betainc_regularized(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    """P(T <= t) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * betainc_regularized(df / 2.0, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def _clamp_p(p: float) -> float:
    return min(1.0, max(P_MIN, p))


def paired_t_one_sided(a, b) -> TestResult:
    """One-sided paired t-test of H1: mean(a) < mean(b).

    Small p-values mean the ``a`` series is significantly smaller.
    """
    if len(a) != len(b):
        raise LengthMismatch(f"series lengths differ: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise SingletonSeries("paired test requires at least 2 pairs")
    d = [x - y for x, y in zip(a, b)]
    var = _sample_variance(d)
    df = n - 1
    if var == 0.0:
        mean_d = _mean(d)
        if mean_d == 0.0:
            raise ZeroVarianceDifferences("the paired series are identical")
        # constant non-zero differences: the statistic degenerates to +-inf
        t = math.inf if mean_d > 0 else -math.inf
        p = 1.0 if mean_d > 0 else P_MIN
        return TestResult(t, p, df, "pairedOneSidedT")
    t = _mean(d) / math.sqrt(var / n)
    return TestResult(t, _clamp_p(student_t_cdf(t, df)), df, "pairedOneSidedT")


def unpaired_t_two_sided(a, b) -> TestResult:
    """Welch's two-sided unpaired t-test with Welch-Satterthwaite df."""
    if len(a) < 2 or len(b) < 2:
        raise SingletonSeries("unpaired test requires at least 2 values per series")
    va, vb = _sample_variance(a), _sample_variance(b)
    if va == 0.0 and vb == 0.0:
        raise ZeroVariance("both series have zero variance")
    na, nb = len(a), len(b)
    sa, sb = va / na, vb / nb
    t = (_mean(a) - _mean(b)) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (na - 1) + sb**2 / (nb - 1))
    p = 2.0 * (1.0 - student_t_cdf(abs(t), df))
    return TestResult(t, _clamp_p(p), df, "unpairedTwoSidedT")


def pearson(x, y) -> TestResult:
    """Pearson correlation with a two-sided p-value via the t transform."""
    if len(x) != len(y):
        raise LengthMismatch(f"series lengths differ: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 3:
        raise ValueError("pearson requires at least 3 points")
    mx, my = _mean(x), _mean(y)
    sxx = sum((v - mx) ** 2 for v in x)
    syy = sum((v - my) ** 2 for v in y)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("a series with zero variance has no correlation")
    sxy = sum((u - mx) * (v - my) for u, v in zip(x, y))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if 1.0 - r * r < 1e-15:
        return TestResult(r, P_MIN, n - 2, "pearson")
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * (1.0 - student_t_cdf(abs(t), n - 2))
    return TestResult(r, _clamp_p(p), n - 2, "pearson")


def improvement_percentage(m: float, m_prime: float) -> float:
    """(1 - m/m')*100: positive when the adaptive value ``m`` is smaller."""
    if m_prime == 0:
        raise ZeroDivisionError("baseline value is zero")
    return (1.0 - m / m_prime) * 100.0
