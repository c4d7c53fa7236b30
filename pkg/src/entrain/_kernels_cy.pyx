# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled frame kernels: RMS and normalized autocorrelation.

Same contract as ``entrain._kernels_py``; see that module for the math.
"""

from libc.math cimport sqrt

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

cdef double _TINY = 1e-30


def frame_rms(x, int frame_len, int hop):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = \
        np.ascontiguousarray(x, dtype=np.float64)
    cdef int n_frames = 1 + (xa.shape[0] - frame_len) // hop
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n_frames)
    cdef double* px = <double*> xa.data
    cdef double* po = <double*> out.data
    cdef Py_ssize_t f, i, start
    cdef double acc
    for f in range(n_frames):
        start = <Py_ssize_t> f * hop
        acc = 0.0
        for i in range(frame_len):
            acc += px[start + i] * px[start + i]
        po[f] = sqrt(acc / frame_len)
    return out


def nccf_block(x, int frame_len, int hop, int lag_min, int lag_max,
               int first_frame, int n_frames):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = \
        np.ascontiguousarray(x, dtype=np.float64)
    cdef int n_lags = lag_max - lag_min + 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = \
        np.empty((n_frames, n_lags))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.empty(frame_len)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] csq = np.empty(frame_len + 1)
    cdef double* px = <double*> xa.data
    cdef double* pb = <double*> buf.data
    cdef double* pc = <double*> csq.data
    cdef double* po
    cdef Py_ssize_t f, i, start
    cdef int tau
    cdef double mean, num, e_head, e_tail, total

    for f in range(n_frames):
        start = <Py_ssize_t> (first_frame + f) * hop
        mean = 0.0
        for i in range(frame_len):
            mean += px[start + i]
        mean /= frame_len
        pc[0] = 0.0
        for i in range(frame_len):
            pb[i] = px[start + i] - mean
            pc[i + 1] = pc[i] + pb[i] * pb[i]
        total = pc[frame_len]
        po = <double*> out.data + f * n_lags
        for tau in range(lag_min, lag_max + 1):
            num = 0.0
            for i in range(frame_len - tau):
                num += pb[i] * pb[i + tau]
            e_head = pc[frame_len - tau]
            e_tail = total - pc[tau]
            if e_head < 0.0:
                e_head = 0.0
            if e_tail < 0.0:
                e_tail = 0.0
            po[tau - lag_min] = num / (sqrt(e_head * e_tail) + _TINY)
    return out
