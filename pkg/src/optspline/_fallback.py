"""Pure numpy implementation of the compiled core."""
import numpy as np


def polyphase_rows(x, taps, index):
    """out[r, F*i + p] = sum_k taps[p, k] * x[r, index[i + k]]."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    taps = np.ascontiguousarray(taps, dtype=np.float64)
    F, K = taps.shape
    N = index.shape[0] - K + 1
    if N < 1:
        raise ValueError("index table shorter than the filter")
    ext = x[:, index]
    out = np.empty((x.shape[0], N * F))
    for p in range(F):
        acc = np.zeros((x.shape[0], N))
        for k in range(K):
            acc += taps[p, k] * ext[:, k:k + N]
        out[:, p::F] = acc
    return out
