"""Dyad-level entrainment metrics: proximity, convergence, synchrony.

All three operate on a pair of resampled feature tracks sharing one time
grid. Proximity at each grid time is the negated absolute difference of the
two (z-scored) values, so 0 is maximal similarity. Convergence is the
Pearson correlation of the proximity series with time: positive means the
speakers grow more similar over the session. Synchrony is the Pearson
correlation between the two series themselves, optionally lag-shifted;
positive ``delta`` means the second track trails the first by that many
seconds (a lag search can pick the delta maximizing r).

On the uniform grid the correlation-of-integrals form reduces exactly to
sample Pearson correlations (the constant dt cancels in the ratio).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateSeries, EntrainError, GridMismatch,
                     InsufficientOverlap)
from .features import FEATURES
from .preprocess import ResampledTrack, TimeGrid
from .stats import pearson_p_from_r

DEFAULT_ALPHA = 0.01


@dataclass(frozen=True)
class ProximitySeries:
    """Per-grid-point similarity D(t) = -|a(t) - b(t)|; every value <= 0."""

    grid: TimeGrid
    values: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.values.mean())


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    p_value: float
    significant_positive: bool
    delta: float | None = None


@dataclass(frozen=True)
class SynchronyConfig:
    """Lag configuration: fixed ``delta``, or a (min, max, step) search."""

    delta: float = 0.0
    search_range: tuple[float, float, float] | None = None


@dataclass(frozen=True)
class FeatureMetrics:
    """Per-feature results; unavailable metrics carry a reason in ``issues``."""

    proximity_mean: float | None = None
    convergence: CorrelationResult | None = None
    synchrony: CorrelationResult | None = None
    issues: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class EntrainmentReport:
    """Primary per-dyad output record.

    ``entrained`` is true iff some feature has significantly positive
    convergence or significantly positive synchrony.
    """

    dyad_id: str
    features: dict[str, FeatureMetrics]
    entrained: bool
    alpha: float = DEFAULT_ALPHA


def _check_grids(a: ResampledTrack, b: ResampledTrack) -> None:
    if a.grid != b.grid:
        raise GridMismatch(f"grids differ: {a.grid} vs {b.grid}")
    if a.feature != b.feature:
        raise GridMismatch(f"features differ: {a.feature} vs {b.feature}")


def _correlate(x: np.ndarray, y: np.ndarray, alpha: float,
               delta: float | None = None) -> CorrelationResult:
    n = len(x)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateSeries("constant series")
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    p = pearson_p_from_r(r, n)
    return CorrelationResult(r, n, p, bool(r > 0.0 and p < alpha), delta)


def proximity(a: ResampledTrack, b: ResampledTrack) -> ProximitySeries:
    """Negative absolute difference of the two tracks at every grid point."""
    _check_grids(a, b)
    return ProximitySeries(a.grid, -np.abs(a.values - b.values))


def convergence(a: ResampledTrack, b: ResampledTrack,
                alpha: float = DEFAULT_ALPHA) -> CorrelationResult:
    """Correlation of proximity with time.

    Raises
    ------
    GridMismatch
        Tracks on different grids or features.
    DegenerateSeries
        Fewer than 3 grid points, or constant proximity.
    """
    _check_grids(a, b)
    d = proximity(a, b).values
    if len(d) < 3:
        raise DegenerateSeries(f"need >= 3 grid points, got {len(d)}")
    return _correlate(d, a.grid.times(), alpha)


def _lagged_pair(a: np.ndarray, b: np.ndarray, shift: int) -> tuple[np.ndarray, np.ndarray]:
    # pairs (a[i], b[i + shift]); positive shift = b trails a
    n = len(a)
    if shift >= 0:
        return a[:n - shift], b[shift:]
    return a[-shift:], b[:n + shift]


def synchrony(a: ResampledTrack, b: ResampledTrack,
              cfg: SynchronyConfig = SynchronyConfig(),
              alpha: float = DEFAULT_ALPHA) -> CorrelationResult:
    """Lagged Pearson correlation between the two feature series.

    With ``cfg.search_range`` set, evaluates every delta on that lattice and
    returns the result at the correlation-maximizing delta (recorded on the
    result); otherwise uses ``cfg.delta``.

    Raises
    ------
    GridMismatch, InsufficientOverlap, DegenerateSeries
    """
    _check_grids(a, b)
    step = a.grid.step
    n = a.grid.n_points

    def at_delta(delta: float) -> CorrelationResult:
        shift = int(round(delta / step))
        if n - abs(shift) < 3:
            raise InsufficientOverlap(
                f"lag {delta} s leaves {max(0, n - abs(shift))} points")
        x, y = _lagged_pair(a.values, b.values, shift)
        return _correlate(x, y, alpha, delta=shift * step)

    if cfg.search_range is None:
        return at_delta(cfg.delta)

    lo, hi, dstep = cfg.search_range
    if dstep <= 0 or hi < lo:
        raise ValueError(f"bad search range {cfg.search_range}")
    best: CorrelationResult | None = None
    delta = lo
    while delta <= hi + 1e-9:
        try:
            res = at_delta(delta)
        except (InsufficientOverlap, DegenerateSeries):
            res = None
        if res is not None and (best is None or res.r > best.r):
            best = res
        delta += dstep
    if best is None:
        raise InsufficientOverlap("no delta in the search range is usable")
    return best


def analyze_dyad(tracks_a: dict[str, ResampledTrack],
                 tracks_b: dict[str, ResampledTrack],
                 dyad_id: str = "dyad",
                 alpha: float = DEFAULT_ALPHA,
                 sync: SynchronyConfig = SynchronyConfig()) -> EntrainmentReport:
    """All three metrics for every feature of a dyad.

    Per-feature failures (missing track, degenerate series, ...) are
    captured as reasons on that feature, never aborting the report.
    """
    per_feature: dict[str, FeatureMetrics] = {}
    entrained = False
    for feature in FEATURES:
        ta, tb = tracks_a.get(feature), tracks_b.get(feature)
        if ta is None or tb is None:
            missing = [s for s, t in (("A", ta), ("B", tb)) if t is None]
            per_feature[feature] = FeatureMetrics(
                issues={"track": f"missing for speaker(s) {', '.join(missing)}"})
            continue
        issues: dict[str, str] = {}
        prox_mean = conv = syn = None
        try:
            prox_mean = proximity(ta, tb).mean
        except EntrainError as exc:
            issues["proximity"] = f"{type(exc).__name__}: {exc}"
        try:
            conv = convergence(ta, tb, alpha)
        except EntrainError as exc:
            issues["convergence"] = f"{type(exc).__name__}: {exc}"
        try:
            syn = synchrony(ta, tb, sync, alpha)
        except EntrainError as exc:
            issues["synchrony"] = f"{type(exc).__name__}: {exc}"
        per_feature[feature] = FeatureMetrics(prox_mean, conv, syn, issues)
        for res in (conv, syn):
            if res is not None and res.significant_positive:
                entrained = True
    return EntrainmentReport(dyad_id, per_feature, entrained, alpha)


def metric_value(report: EntrainmentReport, feature: str, metric: str) -> float | None:
    """One scalar from a report: ``convergence``/``synchrony`` give r,
    ``proximity_mean`` the proximity average; None when unavailable."""
    fm = report.features.get(feature)
    if fm is None:
        return None
    if metric == "proximity_mean":
        return fm.proximity_mean
    if metric == "convergence":
        return None if fm.convergence is None else fm.convergence.r
    if metric == "synchrony":
        return None if fm.synchrony is None else fm.synchrony.r
    raise ValueError(f"unknown metric {metric!r}")


def report_to_dict(report: EntrainmentReport) -> dict:
    """JSON-ready form of a report (documented schema, stable key order)."""

    def corr(res: CorrelationResult | None) -> dict | None:
        if res is None:
            return None
        return {"r": res.r, "n": res.n, "p_value": res.p_value,
                "significant_positive": res.significant_positive,
                "delta": res.delta}

    return {
        "dyad_id": report.dyad_id,
        "alpha": report.alpha,
        "entrained": report.entrained,
        "features": {
            name: {
                "proximity_mean": fm.proximity_mean,
                "convergence": corr(fm.convergence),
                "synchrony": corr(fm.synchrony),
                "issues": dict(sorted(fm.issues.items())),
            }
            for name, fm in report.features.items()
        },
    }
