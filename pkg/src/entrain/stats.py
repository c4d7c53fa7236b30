"""Statistical tests used by the study analysis.

All tests are self-contained (distribution functions from
:mod:`entrain.special`): Pearson correlation with the two-sided t-test,
Kruskal-Wallis with midrank tie correction, Shapiro-Wilk normality via the
Royston (1995) approximation, Levene/Brown-Forsythe homogeneity of variance,
and post-hoc power for correlations via the Fisher z approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (AllValuesIdentical, DegenerateGroup, DegenerateSeries,
                     InvalidEffectSize, LengthMismatch, OutOfRangeN,
                     TooFewGroups)
from .special import (chi2_sf, f_sf, normal_cdf, normal_ppf, normal_sf,
                      student_t_two_sided)


@dataclass(frozen=True)
class TestResult:
    method: str
    statistic: float
    p_value: float
    n: int | None = None
    group_sizes: tuple[int, ...] | None = None


def pearson_p_from_r(r: float, n: int) -> float:
    """Two-sided p for a correlation coefficient via the t-transform."""
    df = n - 2
    if abs(r) >= 1.0:
        return 0.0
    t = abs(r) * math.sqrt(df / (1.0 - r * r))
    return student_t_two_sided(t, df)


def pearson(x, y) -> TestResult:
    """Product-moment correlation with a two-sided significance test.

    Raises
    ------
    LengthMismatch
        ``x`` and ``y`` differ in length.
    DegenerateSeries
        Fewer than 3 pairs, or either side has zero variance.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} vs {len(y)} samples")
    n = len(x)
    if n < 3:
        raise DegenerateSeries(f"need >= 3 pairs, got {n}")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateSeries("zero variance")
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    return TestResult("pearson", r, pearson_p_from_r(r, n), n=n)


def _midranks(values: np.ndarray) -> tuple[np.ndarray, float]:
    """Midranks of ``values`` plus the tie-correction sum  sum(t^3 - t)."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    tie_sum = 0.0
    i = 0
    sv = values[order]
    while i < len(sv):
        j = i
        while j < len(sv) and sv[j] == sv[i]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + j - 1) + 1.0
        t = j - i
        tie_sum += t * t * t - t
        i = j
    return ranks, tie_sum


def kruskal_wallis(groups) -> TestResult:
    """Kruskal-Wallis H test across ``groups`` (chi-square approximation)."""
    if len(groups) < 2:
        raise TooFewGroups(f"need >= 2 groups, got {len(groups)}")
    groups = [np.asarray(g, dtype=np.float64) for g in groups]
    sizes = tuple(len(g) for g in groups)
    if any(s == 0 for s in sizes):
        raise TooFewGroups("empty group")
    n_total = sum(sizes)
    if n_total < 3:
        raise TooFewGroups(f"need >= 3 observations, got {n_total}")
    pooled = np.concatenate(groups)
    ranks, tie_sum = _midranks(pooled)
    correction = 1.0 - tie_sum / (n_total ** 3 - n_total)
    if correction == 0.0:
        raise AllValuesIdentical("all observations equal")
    h = 0.0
    pos = 0
    for s in sizes:
        h += ranks[pos:pos + s].sum() ** 2 / s
        pos += s
    h = 12.0 / (n_total * (n_total + 1)) * h - 3.0 * (n_total + 1)
    h /= correction
    return TestResult("kruskal_wallis", h, chi2_sf(h, len(groups) - 1),
                      n=n_total, group_sizes=sizes)


def shapiro_wilk(x) -> TestResult:
    """Shapiro-Wilk W test of normality (Royston 1995, 3 <= n <= 5000)."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    n = len(x)
    if not 3 <= n <= 5000:
        raise OutOfRangeN(f"n={n} outside [3, 5000]")
    xc = x - x.mean()
    ss = float(xc @ xc)
    if ss == 0.0:
        raise AllValuesIdentical("all observations equal")

    m = np.array([normal_ppf((i - 0.375) / (n + 0.25))
                  for i in range(1, n + 1)])
    ssm = float(m @ m)
    a = np.empty(n)
    if n == 3:
        a[0], a[1], a[2] = -math.sqrt(0.5), 0.0, math.sqrt(0.5)
    else:
        c = m / math.sqrt(ssm)
        u = 1.0 / math.sqrt(n)
        an = (((((-2.706056 * u + 4.434685) * u - 2.071190) * u - 0.147981) * u
               + 0.221157) * u + c[-1])
        if n > 5:
            an1 = (((((-3.582633 * u + 5.682633) * u - 1.752461) * u
                     - 0.293762) * u + 0.042981) * u + c[-2])
            phi = ((ssm - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2)
                   / (1.0 - 2.0 * an ** 2 - 2.0 * an1 ** 2))
            a[2:-2] = m[2:-2] / math.sqrt(phi)
            a[0], a[1], a[-2], a[-1] = -an, -an1, an1, an
        else:
            phi = (ssm - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * an ** 2)
            a[1:-1] = m[1:-1] / math.sqrt(phi)
            a[0], a[-1] = -an, an
    w = float(a @ xc) ** 2 / ss
    w = max(0.0, min(1.0, w))

    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        p = max(0.0, min(1.0, p))
    else:
        if n <= 11:
            g = -2.273 + 0.459 * n
            arg = g - math.log1p(-w) if w < 1.0 else math.inf
            if not arg > 0.0:
                return TestResult("shapiro_wilk", w, 0.0, n=n)
            wt = -math.log(arg)
            mu = 0.5440 - 0.39978 * n + 0.025054 * n ** 2 - 0.0006714 * n ** 3
            sigma = math.exp(1.3822 - 0.77857 * n + 0.062767 * n ** 2
                             - 0.0020322 * n ** 3)
        else:
            ln_n = math.log(n)
            wt = math.log1p(-w) if w < 1.0 else -math.inf
            mu = (-1.5861 - 0.31082 * ln_n - 0.083751 * ln_n ** 2
                  + 0.0038915 * ln_n ** 3)
            sigma = math.exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n ** 2)
        p = normal_sf((wt - mu) / sigma)
    return TestResult("shapiro_wilk", w, p, n=n)


def levene(groups, center: str = "mean") -> TestResult:
    """Levene homogeneity-of-variance test (``center="median"`` gives
    Brown-Forsythe)."""
    if len(groups) < 2:
        raise TooFewGroups(f"need >= 2 groups, got {len(groups)}")
    if center not in ("mean", "median"):
        raise ValueError(f"center must be 'mean' or 'median', got {center!r}")
    groups = [np.asarray(g, dtype=np.float64) for g in groups]
    sizes = tuple(len(g) for g in groups)
    if any(s < 2 for s in sizes):
        raise DegenerateGroup("every group needs >= 2 values")
    k = len(groups)
    n_total = sum(sizes)
    loc = np.mean if center == "mean" else np.median
    z = [np.abs(g - loc(g)) for g in groups]
    zbars = np.array([zi.mean() for zi in z])
    grand = sum(zi.sum() for zi in z) / n_total
    ss_between = float(np.sum(np.array(sizes) * (zbars - grand) ** 2))
    ss_within = float(sum(((zi - zb) ** 2).sum() for zi, zb in zip(z, zbars)))
    if ss_within == 0.0:
        raise DegenerateGroup("no within-group variation in |deviations|")
    w = (n_total - k) / (k - 1) * ss_between / ss_within
    return TestResult("levene_" + center, w, f_sf(w, k - 1, n_total - k),
                      n=n_total, group_sizes=sizes)


def power_pearson(r: float, n: int, alpha: float = 0.05) -> float:
    """Post-hoc power of the two-sided Pearson test at effect size ``r``.

    Fisher z approximation: z_r = atanh(r) is treated as normal with
    standard error 1/sqrt(n-3).
    """
    if not abs(r) < 1.0:
        raise InvalidEffectSize(f"|r| must be < 1, got {r}")
    if n < 4:
        raise ValueError(f"need n >= 4, got {n}")
    zr = math.atanh(r)
    se = 1.0 / math.sqrt(n - 3)
    z_crit = normal_ppf(1.0 - alpha / 2.0)
    return normal_cdf(zr / se - z_crit) + normal_cdf(-zr / se - z_crit)
