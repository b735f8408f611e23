"""Significance tests over per-fold accuracies.

One-way ANOVA (F test) and one-tailed t-tests, with both CDFs evaluated
through a regularized incomplete beta function computed by the modified
Lentz continued fraction.  No external statistics package is involved.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGroups, LengthMismatch, ZeroVariance

_BETA_EPS = 1e-15
_BETA_TINY = 1e-300
_BETA_MAX_ITER = 500


@dataclass(frozen=True)
class StatTestResult:
    statistic: float
    p_value: float
    dof: tuple  # ANOVA: (between, within); t-test: (dof,)

    def __str__(self):
        dof = ", ".join(f"{d:g}" for d in self.dof)
        return f"stat={self.statistic:.6g} p={self.p_value:.6g} dof=({dof})"


def _beta_cont_frac(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (Lentz's method)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_TINY:
        d = _BETA_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction failed to converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def f_cdf(f: float, d1: float, d2: float) -> float:
    if f <= 0.0:
        return 0.0
    return betainc(d1 / 2.0, d2 / 2.0, d1 * f / (d1 * f + d2))


def t_cdf(t: float, dof: float) -> float:
    if t == 0.0:
        return 0.5
    tail = 0.5 * betainc(dof / 2.0, 0.5, dof / (dof + t * t))
    return 1.0 - tail if t > 0 else tail


def one_way_anova(groups) -> StatTestResult:
    """Single-factor ANOVA over k groups of fold accuracies."""
    data = [np.asarray(g, dtype=float) for g in groups]
    if len(data) < 2 or any(len(g) < 2 for g in data):
        raise ValueError("need at least 2 groups with at least 2 samples each")
    k = len(data)
    n_total = sum(len(g) for g in data)
    grand = sum(g.sum() for g in data) / n_total
    ss_between = sum(len(g) * (g.mean() - grand) ** 2 for g in data)
    ss_within = sum(((g - g.mean()) ** 2).sum() for g in data)
    d1, d2 = k - 1, n_total - k
    if ss_within == 0.0:
        if ss_between == 0.0:
            raise DegenerateGroups("all samples identical; F is undefined")
        return StatTestResult(statistic=math.inf, p_value=0.0, dof=(d1, d2))
    f = (ss_between / d1) / (ss_within / d2)
    return StatTestResult(statistic=float(f), p_value=1.0 - f_cdf(f, d1, d2), dof=(d1, d2))


def t_test_one_tailed(a, b, paired: bool = True) -> StatTestResult:
    """One-tailed t-test (alternative: mean(a) > mean(b)).

    The p-value uses |t| against the upper tail, matching symmetric
    pairwise-comparison tables; paired uses the differences, unpaired the
    Welch statistic with Welch-Satterthwaite degrees of freedom.
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if paired:
        if len(x) != len(y):
            raise LengthMismatch(f"paired test needs equal lengths, got {len(x)} and {len(y)}")
        if len(x) < 2:
            raise ValueError("need at least 2 paired samples")
        d = x - y
        sd = d.std(ddof=1)
        n = len(d)
        if sd == 0.0:
            if d.mean() == 0.0:
                raise ZeroVariance("all paired differences are zero; no evidence either way")
            return StatTestResult(statistic=math.copysign(math.inf, d.mean()),
                                  p_value=0.0, dof=(float(n - 1),))
        t = d.mean() / (sd / math.sqrt(n))
        dof = float(n - 1)
    else:
        if len(x) < 2 or len(y) < 2:
            raise ValueError("need at least 2 samples per group")
        vx, vy = x.var(ddof=1), y.var(ddof=1)
        nx, ny = len(x), len(y)
        se2 = vx / nx + vy / ny
        if se2 == 0.0:
            if x.mean() == y.mean():
                raise ZeroVariance("both samples are constant and equal; no evidence either way")
            return StatTestResult(statistic=math.copysign(math.inf, x.mean() - y.mean()),
                                  p_value=0.0, dof=(float(nx + ny - 2),))
        t = (x.mean() - y.mean()) / math.sqrt(se2)
        dof = se2 ** 2 / (
            (vx / nx) ** 2 / (nx - 1) + (vy / ny) ** 2 / (ny - 1))
    p = 1.0 - t_cdf(abs(t), dof)
    return StatTestResult(statistic=float(t), p_value=p, dof=(dof,))
