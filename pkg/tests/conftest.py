import math

import numpy as np
import pytest

from entrain.audio import AudioBuffer
from entrain.features import UtteranceFeaturePoint
from entrain.segmentation import UtteranceSegment

SR = 16000


def sine(freq, duration, sr=SR, amplitude=0.6, phase=0.0):
    t = np.arange(int(round(duration * sr))) / sr
    return amplitude * np.sin(2 * np.pi * freq * t + phase)


def sine_buffer(freq, duration, sr=SR, amplitude=0.6):
    return AudioBuffer(sine(freq, duration, sr, amplitude), sr)


def tone_bursts(schedule, duration, sr=SR, amplitude=0.6):
    """Signal with (start, end, freq) voiced bursts and silence elsewhere."""
    x = np.zeros(int(round(duration * sr)))
    for start, end, freq in schedule:
        i, j = int(round(start * sr)), int(round(end * sr))
        t = np.arange(j - i) / sr
        burst = amplitude * np.sin(2 * np.pi * freq * t)
        ramp = min(int(0.005 * sr), (j - i) // 4)
        if ramp > 0:  # fade edges to avoid clicks dominating the VAD
            env = np.ones(j - i)
            env[:ramp] = np.linspace(0, 1, ramp)
            env[-ramp:] = np.linspace(1, 0, ramp)
            burst = burst * env
        x[i:j] = burst
    return AudioBuffer(x, sr)


def make_points(times, values, speaker="s", feature="mean_pitch"):
    seg = UtteranceSegment(speaker, 0.0, 1.0)
    return [UtteranceFeaturePoint(speaker, feature, float(t), float(v), seg)
            for t, v in zip(times, values)]


def knn_oracle(points, grid, k):
    """O(n^2) reference: per query, sort all points by (distance, time),
    take k, then widen to include every point tied with the k-th distance."""
    ts = np.array([p.time for p in points])
    vs = np.array([p.value for p in points])
    out = []
    for t in grid.times():
        d = np.abs(ts - t)
        order = np.lexsort((ts, d))
        kk = min(k, len(ts))
        dk = d[order[kk - 1]]
        chosen = d <= dk
        out.append(math.fsum(vs[chosen]) / int(chosen.sum()))
    return np.array(out)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
