"""Utterance-level feature aggregation.

Each utterance contributes up to four timestamped points: mean/max pitch
over its voiced frames and mean/max intensity over its non-silent frames,
all anchored at the utterance center. Utterances with no voiced frame yield
no pitch points; utterances with no non-silent frame yield nothing.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MismatchedTracks
from .prosody import FrameTrack
from .segmentation import UtteranceSegment, utterance_center

FEATURES = ("mean_pitch", "max_pitch", "mean_intensity", "max_intensity")


@dataclass(frozen=True)
class UtteranceFeaturePoint:
    speaker: str
    feature: str
    time: float
    value: float
    utterance: UtteranceSegment


def aggregate_features(pitch: FrameTrack, intensity: FrameTrack,
                       segments: list[UtteranceSegment]) -> list[UtteranceFeaturePoint]:
    """Aggregate frame tracks into per-utterance feature points.

    ``pitch`` and ``intensity`` must share framing (same recording, same
    frame config); frames whose centers fall in ``[start, end)`` of a
    segment contribute to it.
    """
    if len(pitch) != len(intensity) or (
            len(pitch) and abs(pitch.times[0] - intensity.times[0]) > 1e-9) or (
            len(pitch) > 1 and abs(pitch.hop - intensity.hop) > 1e-12):
        raise MismatchedTracks("pitch and intensity tracks do not share framing")
    if pitch.voiced is None or intensity.silent is None:
        raise MismatchedTracks("need a pitch track and an intensity track")

    points: list[UtteranceFeaturePoint] = []
    times = pitch.times
    for seg in segments:
        lo = int(np.searchsorted(times, seg.start_time, side="left"))
        hi = int(np.searchsorted(times, seg.end_time, side="left"))
        center = utterance_center(seg)
        voiced = pitch.voiced[lo:hi]
        if voiced.any():
            pv = pitch.values[lo:hi][voiced]
            points.append(UtteranceFeaturePoint(
                seg.speaker, "mean_pitch", center, float(pv.mean()), seg))
            points.append(UtteranceFeaturePoint(
                seg.speaker, "max_pitch", center, float(pv.max()), seg))
        audible = ~intensity.silent[lo:hi]
        if audible.any():
            iv = intensity.values[lo:hi][audible]
            points.append(UtteranceFeaturePoint(
                seg.speaker, "mean_intensity", center, float(iv.mean()), seg))
            points.append(UtteranceFeaturePoint(
                seg.speaker, "max_intensity", center, float(iv.max()), seg))
    return points


def write_feature_points_csv(points: list[UtteranceFeaturePoint],
                             path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["speaker", "feature", "time_s", "value"])
        for p in points:
            w.writerow([p.speaker, p.feature, repr(p.time), repr(p.value)])
