"""Select the compiled core when available.

Set ``OPTSPLINE_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

import numpy as np

from . import _fallback

BACKEND = "python"
_compiled = None

if not os.environ.get("OPTSPLINE_PURE_PYTHON"):
    try:
        from . import _core as _compiled

        BACKEND = "cython"
    except ImportError:  # extension not built
        _compiled = None


def mirror_index(n: int, lo: int, hi: int) -> np.ndarray:
    """Whole-sample symmetric extension of ``0..n-1`` evaluated at ``lo..hi``.

    The edge sample is not repeated: ``-1 -> 1``, ``n -> n - 2``.
    """
    idx = np.arange(lo, hi + 1, dtype=np.int64)
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * (n - 1)
    idx = np.mod(idx, period)
    return np.where(idx >= n, period - idx, idx)


def polyphase_rows(x, taps, index, backend=None):
    """Polyphase FIR along rows with an explicit source-index table.

    ``out[r, F*i + p] = sum_k taps[p, k] * x[r, index[i + k]]``.
    """
    use = backend or BACKEND
    x = np.ascontiguousarray(x, dtype=np.float64)
    taps = np.ascontiguousarray(np.atleast_2d(taps), dtype=np.float64)
    index = np.ascontiguousarray(index, dtype=np.int64)
    if use == "cython":
        if _compiled is None:
            raise RuntimeError("compiled core is not available")
        return _compiled.polyphase_rows(x, taps, index)
    return _fallback.polyphase_rows(x, taps, index)
