"""Energy-based utterance segmentation with hysteresis.

Speech opens after the intensity stays above ``open_db`` for ``min_speech``
seconds and closes after it stays below ``close_db`` for ``min_gap`` seconds;
the two thresholds prevent chattering around a single level. Segments are
then filtered by minimum length and nearby segments merged, in that order.

Boundaries can also be supplied externally (hand annotation, another VAD)
through the ``speaker,start_s,end_s`` CSV format.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError
from .prosody import FrameTrack


@dataclass(frozen=True)
class VadConfig:
    open_db: float = -30.0
    close_db: float = -35.0
    min_speech: float = 0.100
    min_gap: float = 0.250
    min_utterance: float = 0.300
    merge_gap: float = 0.150


@dataclass(frozen=True)
class UtteranceSegment:
    """One contiguous stretch of speech from one speaker."""

    speaker: str
    start_time: float
    end_time: float

    def __post_init__(self):
        if not self.start_time < self.end_time:
            raise ValueError(
                f"segment start {self.start_time} must precede end {self.end_time}")

    @property
    def duration(self) -> float:
        return self.end_time - self.start_time


def utterance_center(seg: UtteranceSegment) -> float:
    """Center time point (start + end) / 2, the anchor for feature points."""
    return (seg.start_time + seg.end_time) / 2.0


def detect_utterances(intensity: FrameTrack, vad: VadConfig = VadConfig(),
                      speaker: str = "spk") -> list[UtteranceSegment]:
    """Segment an intensity track into utterances.

    ``intensity`` must come from :func:`entrain.prosody.rms_intensity` on the
    speaker's recording. Returns possibly-empty, sorted, non-overlapping
    segments.
    """
    n = len(intensity)
    if n == 0:
        return []
    hop = intensity.hop if n > 1 else 0.01
    min_speech_frames = max(1, int(round(vad.min_speech / hop)))
    min_gap_frames = max(1, int(round(vad.min_gap / hop)))

    raw: list[tuple[int, int]] = []  # inclusive frame-index spans
    in_speech = False
    run_start = 0       # start of the current loud run (while closed)
    loud_run = 0
    quiet_start = 0
    quiet_run = 0
    seg_start = 0
    for i, v in enumerate(intensity.values):
        if not in_speech:
            if v > vad.open_db:
                if loud_run == 0:
                    run_start = i
                loud_run += 1
                if loud_run >= min_speech_frames:
                    in_speech = True
                    seg_start = run_start
                    quiet_run = 0
            else:
                loud_run = 0
        else:
            if v < vad.close_db:
                if quiet_run == 0:
                    quiet_start = i
                quiet_run += 1
                if quiet_run >= min_gap_frames:
                    raw.append((seg_start, quiet_start - 1))
                    in_speech = False
                    loud_run = 0
            else:
                quiet_run = 0
    if in_speech:
        end = quiet_start - 1 if quiet_run > 0 else n - 1
        raw.append((seg_start, end))

    # frame spans -> times, pad half a hop outward, clamp at zero
    times = intensity.times
    spans = [(max(0.0, times[a] - hop / 2), times[b] + hop / 2) for a, b in raw]
    spans = [s for s in spans if s[1] - s[0] >= vad.min_utterance]

    merged: list[list[float]] = []
    for s, e in spans:
        if merged and s - merged[-1][1] < vad.merge_gap:
            merged[-1][1] = e
        else:
            merged.append([s, e])
    return [UtteranceSegment(speaker, s, e) for s, e in merged]


def write_segments_csv(segments: list[UtteranceSegment], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["speaker", "start_s", "end_s"])
        for seg in segments:
            w.writerow([seg.speaker, repr(seg.start_time), repr(seg.end_time)])


def read_segments_csv(path: str | Path) -> list[UtteranceSegment]:
    """Load segments, validating ordering and non-overlap per speaker."""
    segments: list[UtteranceSegment] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["speaker", "start_s", "end_s"]:
            raise ParseError(f"{path}: expected header speaker,start_s,end_s")
        for ln, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{ln}: expected 3 fields")
            try:
                seg = UtteranceSegment(row[0], float(row[1]), float(row[2]))
            except ValueError as exc:
                raise ParseError(f"{path}:{ln}: {exc}") from exc
            segments.append(seg)
    by_speaker: dict[str, list[UtteranceSegment]] = {}
    for seg in segments:
        by_speaker.setdefault(seg.speaker, []).append(seg)
    for spk, segs in by_speaker.items():
        segs.sort(key=lambda s: s.start_time)
        for prev, cur in zip(segs, segs[1:]):
            if cur.start_time < prev.end_time:
                raise ParseError(
                    f"{path}: overlapping segments for speaker {spk!r} "
                    f"at {cur.start_time}")
    return sorted(segments, key=lambda s: (s.speaker, s.start_time))
