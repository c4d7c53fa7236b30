import numpy as np
import pytest

from entrain.errors import ParseError
from entrain.prosody import FrameConfig, rms_intensity
from entrain.segmentation import (UtteranceSegment, VadConfig,
                                  detect_utterances, read_segments_csv,
                                  utterance_center, write_segments_csv)

from conftest import SR, tone_bursts

CFG = FrameConfig()
VAD = VadConfig()


def _segments_of(buf, vad=VAD):
    return detect_utterances(rms_intensity(buf, CFG), vad, "spk")


def test_two_bursts_with_gap():
    buf = tone_bursts([(0.0, 1.0, 220), (2.0, 3.0, 220)], 3.0, amplitude=0.5)
    vad = VadConfig(open_db=-30, close_db=-35, min_gap=0.3)
    segs = _segments_of(buf, vad)
    assert len(segs) == 2
    tol = 2 * CFG.hop
    assert segs[0].start_time == pytest.approx(0.0, abs=tol)
    assert segs[0].end_time == pytest.approx(1.0, abs=tol)
    assert segs[1].start_time == pytest.approx(2.0, abs=tol)
    assert segs[1].end_time == pytest.approx(3.0, abs=tol)


def test_all_silence_gives_empty_list():
    buf = tone_bursts([], 2.0)
    assert _segments_of(buf) == []


def test_continuous_tone_single_segment():
    buf = tone_bursts([(0.0, 2.0, 220)], 2.0, amplitude=0.5)
    segs = _segments_of(buf)
    assert len(segs) == 1
    assert segs[0].start_time == pytest.approx(0.0, abs=2 * CFG.hop)
    assert segs[0].end_time == pytest.approx(2.0, abs=2 * CFG.hop)


def test_short_blips_dropped():
    buf = tone_bursts([(1.0, 1.15, 220)], 2.0, amplitude=0.5)
    assert _segments_of(buf) == []  # 150 ms < min_utterance


def test_close_segments_merge():
    buf = tone_bursts([(0.0, 1.0, 220), (1.5, 2.5, 220)], 2.5, amplitude=0.5)
    vad = VadConfig(min_gap=0.1, merge_gap=0.8)
    segs = _segments_of(buf, vad)
    assert len(segs) == 1
    assert segs[0].duration == pytest.approx(2.5, abs=0.1)


def test_time_shift_moves_boundaries():
    shift = 0.5
    buf1 = tone_bursts([(0.3, 1.3, 220)], 2.0, amplitude=0.5)
    buf2 = tone_bursts([(0.3 + shift, 1.3 + shift, 220)], 2.5, amplitude=0.5)
    s1, s2 = _segments_of(buf1), _segments_of(buf2)
    assert len(s1) == len(s2) == 1
    assert s2[0].start_time - s1[0].start_time == pytest.approx(shift, abs=CFG.hop)
    assert s2[0].end_time - s1[0].end_time == pytest.approx(shift, abs=CFG.hop)


def test_segments_disjoint_and_sorted(rng):
    schedule = []
    t = 0.2
    while t < 8.0:
        dur = rng.uniform(0.35, 1.2)
        schedule.append((t, min(t + dur, 8.2), 200 + 100 * rng.random()))
        t += dur + rng.uniform(0.3, 0.8)
    segs = _segments_of(tone_bursts(schedule, 8.5, amplitude=0.5))
    assert len(segs) >= 3
    for prev, cur in zip(segs, segs[1:]):
        assert prev.end_time <= cur.start_time


def test_utterance_center():
    assert utterance_center(UtteranceSegment("s", 2.0, 4.0)) == 3.0
    assert utterance_center(UtteranceSegment("s", 5.0, 5.2)) == pytest.approx(5.1)
    assert utterance_center(UtteranceSegment("s", 10.0, 13.5)) == 11.75


def test_segment_invariant():
    with pytest.raises(ValueError):
        UtteranceSegment("s", 1.0, 1.0)


def test_csv_roundtrip(tmp_path):
    segs = [UtteranceSegment("a", 0.0, 1.0), UtteranceSegment("a", 2.0, 2.5),
            UtteranceSegment("b", 0.5, 0.9)]
    path = tmp_path / "segs.csv"
    write_segments_csv(segs, path)
    assert read_segments_csv(path) == segs


def test_csv_rejects_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("speaker,begin,end\na,0,1\n")
    with pytest.raises(ParseError):
        read_segments_csv(p)


def test_csv_rejects_overlap(tmp_path):
    p = tmp_path / "ovl.csv"
    p.write_text("speaker,start_s,end_s\na,0.0,2.0\na,1.5,3.0\n")
    with pytest.raises(ParseError):
        read_segments_csv(p)
