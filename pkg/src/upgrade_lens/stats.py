"""Two-sample tests over closeness-centrality samples, plus histograms.

The Welch t statistic uses the unequal-variance form with
Welch-Satterthwaite degrees of freedom; its two-sided p-value comes from
the Student-t distribution evaluated through a continued-fraction
regularized incomplete beta, accurate to better than 1e-10 so p-values
are portable across platforms.

The two-sample Kolmogorov-Smirnov statistic is the exact supremum gap
between empirical distribution functions (sorted merge); its p-value uses
the asymptotic Kolmogorov distribution at sqrt(n_a*n_b/(n_a+n_b)) * D.
The asymptotic form is inaccurate below roughly 20 samples per side.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError
from .metrics import closeness_centrality
from .validation import check_sample

WELCH_T = "welch_t"
KS_TWO_SAMPLE = "ks_two_sample"


@dataclass(frozen=True)
class StatTestResult:
    statistic: float
    p_value: float
    n_a: int
    n_b: int
    test_kind: str


def _mean_var(values: Sequence[float]) -> tuple[float, float]:
    # Two-pass sample variance (ddof=1) for numerical stability.
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, var


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    max_iter = 300
    eps = 1e-15
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) via the continued fraction, relative error below 1e-10."""
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
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for T ~ Student-t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the Kolmogorov distribution, Q(lam).

    Dual evaluation: the theta-series complement for small arguments
    (where the alternating series converges too slowly) and the
    alternating series otherwise.
    """
    if lam <= 0.0:
        return 1.0
    if lam < 1.18:
        x = math.exp(-math.pi * math.pi / (8.0 * lam * lam))
        cdf = (math.sqrt(2.0 * math.pi) / lam) * (
            x + x**9 + x**25 + x**49 + x**81
        )
        return max(0.0, min(1.0, 1.0 - cdf))
    total = 0.0
    for k in range(1, 101):
        term = math.exp(-2.0 * k * k * lam * lam)
        total += -term if k % 2 == 0 else term
        if term < 1e-18:
            break
    return max(0.0, min(1.0, 2.0 * total))


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> StatTestResult:
    """Two-sided Welch t-test (unequal variances).

    Both samples zero-variance: equal means give t=0, p=1; different
    means give an infinite statistic (degenerate marker) with p=0.
    """
    xs = check_sample(a, 2, "a")
    ys = check_sample(b, 2, "b")
    mean_a, var_a = _mean_var(xs)
    mean_b, var_b = _mean_var(ys)
    n_a, n_b = len(xs), len(ys)
    if var_a == 0.0 and var_b == 0.0:
        if mean_a == mean_b:
            return StatTestResult(0.0, 1.0, n_a, n_b, WELCH_T)
        stat = math.inf if mean_a > mean_b else -math.inf
        return StatTestResult(stat, 0.0, n_a, n_b, WELCH_T)
    se_a = var_a / n_a
    se_b = var_b / n_b
    stat = (mean_a - mean_b) / math.sqrt(se_a + se_b)
    df = (se_a + se_b) ** 2 / (
        (se_a * se_a) / (n_a - 1) + (se_b * se_b) / (n_b - 1)
    )
    return StatTestResult(stat, student_t_two_sided_p(stat, df), n_a, n_b, WELCH_T)


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> StatTestResult:
    """Exact two-sample K-S statistic with the asymptotic p-value."""
    xs = sorted(check_sample(a, 1, "a"))
    ys = sorted(check_sample(b, 1, "b"))
    n_a, n_b = len(xs), len(ys)
    d = 0.0
    i = j = 0
    while i < n_a or j < n_b:
        if j >= n_b or (i < n_a and xs[i] <= ys[j]):
            v = xs[i]
        else:
            v = ys[j]
        while i < n_a and xs[i] == v:
            i += 1
        while j < n_b and ys[j] == v:
            j += 1
        gap = abs(i / n_a - j / n_b)
        if gap > d:
            d = gap
    n_eff = n_a * n_b / (n_a + n_b)
    p = 1.0 if d == 0.0 else kolmogorov_sf(math.sqrt(n_eff) * d)
    return StatTestResult(d, p, n_a, n_b, KS_TWO_SAMPLE)


def closeness_histogram(
    values: Sequence[float], bins: int
) -> tuple[list[float], list[int]]:
    """Equal-width histogram over [min, max]; right-most bin is closed.

    A degenerate range collapses to a single bin holding every value; an
    empty sample yields an empty histogram.
    """
    if bins < 1:
        raise DomainError(f"bins must be >= 1, got {bins}")
    vals = check_sample(values, 0, "values")
    if not vals:
        return [], []
    lo, hi = min(vals), max(vals)
    if lo == hi:
        return [lo, hi], [len(vals)]
    width = (hi - lo) / bins
    edges = [lo + i * width for i in range(bins)] + [hi]
    counts = [0] * bins
    for v in vals:
        idx = bisect_right(edges, v) - 1
        if idx == bins:  # v == hi lands in the closed right-most bin
            idx = bins - 1
        counts[idx] += 1
    return edges, counts


def compare_changed_vs_all(cmp, changed_vs_unchanged: bool = False) -> tuple[StatTestResult, StatTestResult]:
    """Welch and K-S tests of closeness: changed nodes against all nodes.

    Closeness is computed once on the full upgraded graph, then sampled.
    The default compares changed against all nodes (overlapping samples);
    ``changed_vs_unchanged`` switches the second sample to the complement.
    """
    closeness = closeness_centrality(cmp.upgraded)
    changed = sorted(cmp.changed_ids)
    if not changed:
        raise DomainError("changed set is empty; nothing to compare")
    sample_a = [closeness[v] for v in changed]
    if changed_vs_unchanged:
        rest = [v for v in range(cmp.upgraded.n) if v not in cmp.changed_ids]
        sample_b = [closeness[v] for v in rest]
    else:
        sample_b = [closeness[v] for v in range(cmp.upgraded.n)]
    return welch_t_test(sample_a, sample_b), ks_two_sample(sample_a, sample_b)
