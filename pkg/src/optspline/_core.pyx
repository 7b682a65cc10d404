# cython: language_level=3
"""Compiled polyphase filtering along the rows of a 2-D array."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def polyphase_rows(const double[:, ::1] x, const double[:, ::1] taps,
                   const cnp.int64_t[::1] index):
    """out[r, F*i + p] = sum_k taps[p, k] * x[r, index[i + k]]."""
    cdef Py_ssize_t R = x.shape[0]
    cdef Py_ssize_t F = taps.shape[0]
    cdef Py_ssize_t K = taps.shape[1]
    cdef Py_ssize_t N = index.shape[0] - K + 1
    if N < 1:
        raise ValueError("index table shorter than the filter")
    out = np.empty((R, N * F), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t r, i, p, k
    cdef double acc
    with nogil:
        for r in range(R):
            for i in range(N):
                for p in range(F):
                    acc = 0.0
                    for k in range(K):
                        acc = acc + taps[p, k] * x[r, index[i + k]]
                    o[r, F * i + p] = acc
    return out
