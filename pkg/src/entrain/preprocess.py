"""Z-score standardization and KNN-regression resampling onto a time grid.

Sparse utterance-level feature points (one speaker talks while the other is
silent) are turned into a gap-free uniform series: the value at each grid
time is the mean of the k points whose utterance centers are nearest in
time (k = 7 by default). Ties at the k-boundary are resolved by including
every point at the boundary distance, which makes the selected set — and,
because the mean is computed with exact summation, the output bits —
independent of traversal order.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateDistribution, EmptyInput
from .features import UtteranceFeaturePoint

DEFAULT_K = 7
DEFAULT_GRID_STEP = 0.100


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t0, t0+step, ... up to (and possibly including) t_end."""

    t0: float
    t_end: float
    step: float

    def __post_init__(self):
        if not (self.t0 < self.t_end and self.step > 0):
            raise ValueError("need t0 < t_end and step > 0")

    @property
    def n_points(self) -> int:
        return int(math.floor((self.t_end - self.t0) / self.step + 1e-9)) + 1

    def times(self) -> np.ndarray:
        return self.t0 + self.step * np.arange(self.n_points)


@dataclass(frozen=True)
class ResampledTrack:
    """One speaker's gap-free feature series on a shared grid (z-units)."""

    speaker: str
    feature: str
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if len(values) != self.grid.n_points:
            raise ValueError("values length must match grid point count")


def zscore(points: list[UtteranceFeaturePoint]) -> list[UtteranceFeaturePoint]:
    """Standardize one (speaker, feature) series to mean 0, sd 1 (ddof=1)."""
    if len(points) < 2:
        raise DegenerateDistribution("need >= 2 points to standardize")
    keys = {(p.speaker, p.feature) for p in points}
    if len(keys) != 1:
        raise ValueError(f"points mix several (speaker, feature) series: {keys}")
    values = np.array([p.value for p in points])
    sd = values.std(ddof=1)
    if sd == 0.0:
        raise DegenerateDistribution("zero variance")
    mean = values.mean()
    return [UtteranceFeaturePoint(p.speaker, p.feature, p.time,
                                  (p.value - mean) / sd, p.utterance)
            for p in points]


def knn_mean(times: Sequence[float], values: Sequence[float],
             t: float, k: int) -> float:
    """Mean of the k values whose timestamps are nearest to ``t``.

    ``times`` must be sorted ascending. The selected window is grown toward
    the closer side (earlier timestamp wins exact ties) and then extended to
    include every point tied with the boundary distance; the mean uses
    ``math.fsum`` so the result does not depend on summation order.
    """
    n = len(times)
    lo = hi = bisect.bisect_left(times, t)
    for _ in range(min(k, n)):
        if lo == 0:
            hi += 1
        elif hi == n:
            lo -= 1
        elif t - times[lo - 1] <= times[hi] - t:
            lo -= 1
        else:
            hi += 1
    dmax = max(t - times[lo], times[hi - 1] - t)
    while lo > 0 and t - times[lo - 1] == dmax:
        lo -= 1
    while hi < n and times[hi] - t == dmax:
        hi += 1
    return math.fsum(values[lo:hi]) / (hi - lo)


def knn_regress(points: list[UtteranceFeaturePoint], grid: TimeGrid,
                k: int = DEFAULT_K) -> ResampledTrack:
    """Fill a uniform grid by k-nearest-neighbor averaging in time.

    Parameters
    ----------
    points:
        Feature points of one (speaker, feature) series; any order.
    grid:
        Target grid.
    k:
        Neighborhood size; when fewer than k points exist, all are averaged.
    """
    if not points:
        raise EmptyInput("no feature points to resample")
    if k < 1:
        raise ValueError("k must be >= 1")
    order = np.argsort([p.time for p in points], kind="stable")
    ts = [points[i].time for i in order]
    vs = [points[i].value for i in order]
    out = np.array([knn_mean(ts, vs, t, k) for t in grid.times()])
    return ResampledTrack(points[0].speaker, points[0].feature, grid, out)


def standardize_track(track: ResampledTrack) -> ResampledTrack:
    """Z-score a resampled track in place of pre-KNN standardization."""
    sd = track.values.std(ddof=1)
    if len(track.values) < 2 or sd == 0.0:
        raise DegenerateDistribution("resampled track has no variance")
    return ResampledTrack(track.speaker, track.feature, track.grid,
                          (track.values - track.values.mean()) / sd)


def grid_from_points(points_by_speaker: Sequence[list[UtteranceFeaturePoint]],
                     step: float = DEFAULT_GRID_STEP) -> TimeGrid:
    """Grid spanning [first, last] utterance center across both speakers."""
    all_times = [p.time for pts in points_by_speaker for p in pts]
    if not all_times:
        raise EmptyInput("no feature points")
    t0, t_end = min(all_times), max(all_times)
    if t_end <= t0:
        t_end = t0 + step  # single utterance: one-step grid
    return TimeGrid(t0, t_end, step)


def write_resampled_csv(tracks: list[ResampledTrack], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["feature", "speaker", "time_s", "zvalue"])
        for track in tracks:
            for t, v in zip(track.grid.times(), track.values):
                w.writerow([track.feature, track.speaker, repr(float(t)), repr(float(v))])
