"""Frame-level pitch and RMS-intensity extraction.

Intensity is ``20*log10(RMS + 1e-10)`` dB relative to full scale. Pitch uses
the normalized autocorrelation of each mean-removed frame over the lag range
``[1/pitch_ceiling, 1/pitch_floor]``: candidate lags are the local maxima,
refined by parabolic interpolation, and the shortest candidate within
``octave_margin`` of the strongest one is taken (guards against period
doubling on strongly periodic signals). A frame is voiced iff its best peak
reaches ``voicing_threshold`` and the frame is not silent. Voiced runs are
smoothed with a short median filter.

The per-frame inner loops live in ``entrain._kernels`` (compiled when built,
numpy otherwise); candidate selection is shared Python so both backends make
identical decisions.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._kernels import frame_rms, nccf_block
from .audio import AudioBuffer
from .errors import AudioTooShort, InvalidConfig

INTENSITY_EPS = 1e-10
_CHUNK_FRAMES = 4096


@dataclass(frozen=True)
class FrameConfig:
    """Analysis-frame parameters (Praat-like conventional defaults)."""

    frame_length: float = 0.040
    hop: float = 0.010
    pitch_floor: float = 75.0
    pitch_ceiling: float = 600.0
    voicing_threshold: float = 0.45
    silence_floor_db: float = -50.0
    octave_margin: float = 0.02
    median_window: int = 5

    def __post_init__(self):
        if not 0 < self.hop <= self.frame_length:
            raise InvalidConfig("need 0 < hop <= frame_length")
        if not 0 < self.pitch_floor < self.pitch_ceiling:
            raise InvalidConfig("need 0 < pitch_floor < pitch_ceiling")


@dataclass(frozen=True)
class FrameTrack:
    """Per-frame measurements at strictly increasing frame-center times.

    ``voiced`` is set on pitch tracks (unvoiced frames carry NaN values);
    ``silent`` is set on intensity tracks.
    """

    times: np.ndarray
    values: np.ndarray
    voiced: np.ndarray | None = None
    silent: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.times)

    @property
    def hop(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


def _framing(audio: AudioBuffer, cfg: FrameConfig) -> tuple[int, int, int, np.ndarray]:
    sr = audio.sample_rate
    frame_len = max(1, int(round(cfg.frame_length * sr)))
    hop = max(1, int(round(cfg.hop * sr)))
    if len(audio.samples) < frame_len:
        raise AudioTooShort(
            f"{audio.duration:.3f} s of audio, need >= {cfg.frame_length} s")
    n_frames = 1 + (len(audio.samples) - frame_len) // hop
    times = (np.arange(n_frames) * hop + frame_len / 2.0) / sr
    return frame_len, hop, n_frames, times


def rms_intensity(audio: AudioBuffer, cfg: FrameConfig) -> FrameTrack:
    """Frame RMS intensity in dB re full scale; quiet frames flagged silent."""
    frame_len, hop, _, times = _framing(audio, cfg)
    rms = frame_rms(audio.samples, frame_len, hop)
    db = 20.0 * np.log10(rms + INTENSITY_EPS)
    return FrameTrack(times=times, values=db, silent=db < cfg.silence_floor_db)


def _pick_candidates(corr: np.ndarray, lag_min: int, sr: int,
                     cfg: FrameConfig) -> tuple[np.ndarray, np.ndarray]:
    """Best pitch per frame from a block of NCCF rows.

    Returns (f0, peak_strength); f0 is NaN where no candidate peak exists.
    """
    n, n_lags = corr.shape
    left, mid, right = corr[:, :-2], corr[:, 1:-1], corr[:, 2:]
    is_peak = (mid > left) & (mid >= right)

    denom = left - 2.0 * mid + right
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(denom != 0.0, 0.5 * (left - right) / denom, 0.0)
    shift = np.clip(shift, -0.5, 0.5)
    refined = mid - 0.25 * (left - right) * shift

    cand = np.where(is_peak, refined, -np.inf)
    best = cand.max(axis=1)
    # shortest lag whose refined strength is within octave_margin of the best
    eligible = is_peak & (refined >= (best - cfg.octave_margin)[:, None])
    first = eligible.argmax(axis=1)
    has_peak = np.isfinite(best)

    rows = np.arange(n)
    lag = (lag_min + 1 + first) + shift[rows, first]
    f0 = np.where(has_peak, sr / np.maximum(lag, 1e-12), np.nan)
    f0 = np.clip(f0, cfg.pitch_floor, cfg.pitch_ceiling)
    strength = np.where(has_peak, best, -np.inf)
    return f0, strength


def _median_smooth(values: np.ndarray, voiced: np.ndarray, window: int) -> np.ndarray:
    """Median-filter pitch values inside each voiced run (edges clipped)."""
    if window <= 1:
        return values
    out = values.copy()
    half = window // 2
    n = len(values)
    i = 0
    while i < n:
        if not voiced[i]:
            i += 1
            continue
        j = i
        while j < n and voiced[j]:
            j += 1
        run = values[i:j]
        if len(run) > 2:
            sm = np.empty_like(run)
            for t in range(len(run)):
                lo = max(0, t - half)
                hi = min(len(run), t + half + 1)
                sm[t] = np.median(run[lo:hi])
            out[i:j] = sm
        i = j
    return out


def pitch_autocorrelation(audio: AudioBuffer, cfg: FrameConfig) -> FrameTrack:
    """Track fundamental frequency via normalized autocorrelation.

    Parameters
    ----------
    audio:
        Signal to analyze; must be at least one frame long and the frame
        must span >= 3 periods of ``pitch_floor``.
    cfg:
        Frame and voicing parameters.

    Returns
    -------
    FrameTrack
        ``values`` in Hz (NaN where unvoiced), ``voiced`` boolean mask.
    """
    sr = audio.sample_rate
    if cfg.pitch_ceiling > sr / 2:
        raise InvalidConfig(f"pitch_ceiling {cfg.pitch_ceiling} above Nyquist")
    frame_len, hop, n_frames, times = _framing(audio, cfg)
    if frame_len * cfg.pitch_floor < 3 * sr:
        raise InvalidConfig(
            f"frame_length {cfg.frame_length} s too short for pitch_floor "
            f"{cfg.pitch_floor} Hz (need >= 3 periods)")
    lag_min = max(2, int(np.ceil(sr / cfg.pitch_ceiling)))
    lag_max = int(np.floor(sr / cfg.pitch_floor))
    if lag_max - lag_min < 3 or lag_max >= frame_len:
        raise InvalidConfig("pitch range too narrow for this sample rate")

    rms = frame_rms(audio.samples, frame_len, hop)
    silent = 20.0 * np.log10(rms + INTENSITY_EPS) < cfg.silence_floor_db

    f0 = np.empty(n_frames)
    strength = np.empty(n_frames)
    for start in range(0, n_frames, _CHUNK_FRAMES):
        count = min(_CHUNK_FRAMES, n_frames - start)
        corr = nccf_block(audio.samples, frame_len, hop,
                          lag_min, lag_max, start, count)
        f0[start:start + count], strength[start:start + count] = \
            _pick_candidates(corr, lag_min, sr, cfg)

    voiced = (strength >= cfg.voicing_threshold) & ~silent & np.isfinite(f0)
    values = _median_smooth(f0, voiced, cfg.median_window)
    values[~voiced] = np.nan
    return FrameTrack(times=times, values=values, voiced=voiced)


def write_frame_track_csv(track: FrameTrack, path: str | Path) -> None:
    """Debug dump as ``time_s,value,voiced`` rows."""
    mask = track.voiced if track.voiced is not None else (
        ~track.silent if track.silent is not None else np.ones(len(track), bool))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s", "value", "voiced"])
        for t, v, m in zip(track.times, track.values, mask):
            w.writerow([repr(float(t)), repr(float(v)), int(m)])
