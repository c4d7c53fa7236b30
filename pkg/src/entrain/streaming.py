"""Incremental sliding-window convergence and synchrony.

Utterance-level feature points arrive per speaker in time order. Whenever
both speakers' watermarks pass the next grid time, the estimator fills that
grid point by k-nearest-neighbor averaging over the points currently held
(a causal variant of the batch resampler), pushes it into a window of the
last ``window`` seconds, and updates running-sum Pearson accumulators for
convergence (proximity vs. time) and synchrony (lag-aligned values).

The accumulators are evicted sample-by-sample as the window slides and the
time sums are rebased every window length, so each grid step costs amortized
O(1) and the windowed metrics match the batch operations applied to the
window's contents to ~1e-12. Lag search is a batch-only facility; streaming
synchrony uses the fixed configured delta.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import OutOfOrderPoint
from .preprocess import DEFAULT_GRID_STEP, DEFAULT_K, knn_mean
from .stats import pearson_p_from_r

DEFAULT_WINDOW = 120.0
_EPS = 1e-9


@dataclass(frozen=True)
class StreamConfig:
    grid_step: float = DEFAULT_GRID_STEP
    k: int = DEFAULT_K
    window: float = DEFAULT_WINDOW
    delta: float = 0.0
    alpha: float = 0.01


@dataclass(frozen=True)
class WindowEvent:
    """Windowed metrics emitted at one grid time (fields None if undefined)."""

    t: float
    n: int
    convergence_r: float | None
    convergence_p: float | None
    synchrony_r: float | None
    synchrony_p: float | None


class _SlidingPearson:
    """Running-sum Pearson over a time-stamped sample window."""

    def __init__(self, rebase_every: float | None = None):
        self.samples: deque[tuple[float, float, float]] = deque()
        self.rebase_every = rebase_every
        self.x_ref = 0.0
        self._zero()

    def _zero(self):
        self.sx = self.sy = self.sxx = self.syy = self.sxy = 0.0

    def _add(self, x: float, y: float, sign: float):
        xs = x - self.x_ref
        self.sx += sign * xs
        self.sy += sign * y
        self.sxx += sign * xs * xs
        self.syy += sign * y * y
        self.sxy += sign * xs * y

    def push(self, t: float, x: float, y: float):
        if self.rebase_every is not None and x - self.x_ref > 2 * self.rebase_every:
            self.x_ref = x
            self._zero()
            for _, xo, yo in self.samples:
                self._add(xo, yo, 1.0)
        self.samples.append((t, x, y))
        self._add(x, y, 1.0)

    def evict_before(self, t_min: float):
        while self.samples and self.samples[0][0] < t_min:
            _, x, y = self.samples.popleft()
            self._add(x, y, -1.0)

    @property
    def n(self) -> int:
        return len(self.samples)

    def correlation(self) -> tuple[float, float] | None:
        n = self.n
        if n < 3:
            return None
        var_x = self.sxx - self.sx * self.sx / n
        var_y = self.syy - self.sy * self.sy / n
        if var_x <= 0.0 or var_y <= 0.0:
            return None
        cov = self.sxy - self.sx * self.sy / n
        r = max(-1.0, min(1.0, cov / math.sqrt(var_x * var_y)))
        return r, pearson_p_from_r(r, n)


class _PointBuffer:
    """One speaker's recent feature points, kept sorted by arrival time."""

    def __init__(self, k: int):
        self.times: list[float] = []
        self.values: list[float] = []
        self.start = 0
        self.k = k

    def append(self, t: float, v: float):
        self.times.append(t)
        self.values.append(v)

    def trim(self, t_min: float):
        n = len(self.times)
        while n - self.start > self.k and self.times[self.start] < t_min:
            self.start += 1
        if self.start > 512:  # amortized compaction
            del self.times[:self.start]
            del self.values[:self.start]
            self.start = 0

    def knn(self, t: float, k: int) -> float:
        return knn_mean(self.times[self.start:], self.values[self.start:], t, k)


class StreamingEntrainment:
    """Sliding-window entrainment estimator for one dyad and one feature."""

    def __init__(self, speaker_a: str, speaker_b: str,
                 config: StreamConfig = StreamConfig()):
        if speaker_a == speaker_b:
            raise ValueError("speakers must be distinct")
        self.config = config
        self._speakers = (speaker_a, speaker_b)
        self._buf = {speaker_a: _PointBuffer(config.k),
                     speaker_b: _PointBuffer(config.k)}
        self._last = {speaker_a: -math.inf, speaker_b: -math.inf}
        self._shift = int(round(config.delta / config.grid_step))
        self._grid_index: int | None = None
        self._window: deque[tuple[float, float, float]] = deque()
        self._conv = _SlidingPearson(rebase_every=config.window)
        self._sync = _SlidingPearson()
        # most recent emissions of the leading series, for lag pairing
        self._lag_ring: deque[float] = deque(maxlen=abs(self._shift) + 1)
        self._last_event: WindowEvent | None = None

    def update(self, t: float, value: float, speaker: str) -> list[WindowEvent]:
        """Feed one feature point; returns events for newly closed grid steps.

        Raises :class:`OutOfOrderPoint` if ``t`` precedes the speaker's
        previous point.
        """
        if speaker not in self._buf:
            raise ValueError(f"unknown speaker {speaker!r}")
        if t < self._last[speaker]:
            raise OutOfOrderPoint(
                f"{speaker}: {t} after {self._last[speaker]}")
        self._last[speaker] = t
        self._buf[speaker].append(t, value)

        a, b = self._speakers
        if self._grid_index is None:
            if not (self._buf[a].times and self._buf[b].times):
                return []
            start = max(self._buf[a].times[0], self._buf[b].times[0])
            self._grid_index = math.ceil(start / self.config.grid_step - _EPS)
        watermark = min(self._last[a], self._last[b])
        events = []
        while self._grid_index * self.config.grid_step <= watermark + _EPS:
            events.append(self._emit(self._grid_index))
            self._grid_index += 1
        return events

    def _emit(self, gi: int) -> WindowEvent:
        cfg = self.config
        g = gi * cfg.grid_step
        a, b = self._speakers
        va = self._buf[a].knn(g, cfg.k)
        vb = self._buf[b].knn(g, cfg.k)

        self._window.append((g, va, vb))
        self._conv.push(g, g, -abs(va - vb))
        s = self._shift
        lead = va if s >= 0 else vb
        self._lag_ring.append(lead)
        if len(self._lag_ring) > abs(s):
            # pair (a[i], b[i+s]); keyed by its older element's grid time so
            # a pair leaves the accumulator when it leaves the window
            lagged = self._lag_ring[0]
            t_pair = (gi - abs(s)) * cfg.grid_step
            if s >= 0:
                self._sync.push(t_pair, lagged, vb)
            else:
                self._sync.push(t_pair, va, lagged)

        t_min = g - cfg.window + _EPS
        while self._window and self._window[0][0] < t_min:
            self._window.popleft()
        self._conv.evict_before(t_min)
        self._sync.evict_before(t_min)
        for buf in self._buf.values():
            buf.trim(g - cfg.window - 2 * cfg.grid_step)

        conv = self._conv.correlation()
        syn = self._sync.correlation()
        self._last_event = WindowEvent(
            t=g, n=len(self._window),
            convergence_r=None if conv is None else conv[0],
            convergence_p=None if conv is None else conv[1],
            synchrony_r=None if syn is None else syn[0],
            synchrony_p=None if syn is None else syn[1])
        return self._last_event

    def snapshot(self) -> WindowEvent | None:
        """Metrics at the last emitted grid step (None before any emission,
        e.g. while only one speaker has produced points)."""
        return self._last_event

    def window_contents(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Times and per-speaker values currently inside the window."""
        if not self._window:
            return np.array([]), np.array([]), np.array([])
        g, va, vb = zip(*self._window)
        return np.array(g), np.array(va), np.array(vb)
