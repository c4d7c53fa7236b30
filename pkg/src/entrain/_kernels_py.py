"""Pure-numpy frame kernels (fallback when the compiled module is absent).

Both backends implement the same two primitives with the same math:

``frame_rms``
    Root-mean-square per analysis frame.
``nccf_block``
    Normalized cross-correlation rows for a block of frames. Each frame is
    mean-removed, then for lag tau::

        nccf[tau] = sum_i x[i] x[i+tau]
                    / sqrt(sum_{i<N-tau} x[i]^2 * sum_{i>=tau} x[i]^2)

    which stays ~1 at the true period regardless of lag (no taper bias) and
    is invariant to positive gain. The numerator here is computed by FFT.

The two backends may differ in the last few ulps (different summation
orders), never beyond that.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_TINY = 1e-30  # keeps silent frames at nccf == 0 instead of 0/0


def frame_rms(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """RMS of each length-``frame_len`` frame taken every ``hop`` samples."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    n_frames = 1 + (len(x) - frame_len) // hop
    sq = np.concatenate(([0.0], np.cumsum(x * x)))
    starts = np.arange(n_frames) * hop
    energy = sq[starts + frame_len] - sq[starts]
    # cumulative sums can go slightly negative on cancellation
    return np.sqrt(np.maximum(energy, 0.0) / frame_len)


def nccf_block(x: np.ndarray, frame_len: int, hop: int,
               lag_min: int, lag_max: int,
               first_frame: int, n_frames: int) -> np.ndarray:
    """Normalized autocorrelation rows for frames ``first_frame`` onward.

    Returns an array of shape ``(n_frames, lag_max - lag_min + 1)``.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    starts = (first_frame + np.arange(n_frames)) * hop
    idx = starts[:, None] + np.arange(frame_len)[None, :]
    frames = x[idx]
    frames -= frames.mean(axis=1, keepdims=True)

    nfft = 1
    while nfft < frame_len + lag_max + 1:
        nfft *= 2
    spec = np.fft.rfft(frames, nfft)
    ac = np.fft.irfft(spec.real * spec.real + spec.imag * spec.imag, nfft)

    sq = np.zeros((n_frames, frame_len + 1))
    np.cumsum(frames * frames, axis=1, out=sq[:, 1:])
    total = sq[:, frame_len]
    lags = np.arange(lag_min, lag_max + 1)
    e_head = sq[:, frame_len - lags]            # sum over i < N - tau
    e_tail = total[:, None] - sq[:, lags]       # sum over i >= tau
    denom = np.sqrt(np.maximum(e_head * e_tail, 0.0)) + _TINY
    return ac[:, lag_min:lag_max + 1] / denom
