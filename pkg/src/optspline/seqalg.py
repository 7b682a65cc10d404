"""Two-sided discrete sequences and their convolution algebra.

A :class:`DiscreteSequence` is a finite window of values starting at an
integer ``offset``; it is zero everywhere else. Inversion of a finitely
supported sequence produces an exponentially decaying two-sided sequence,
which is returned truncated to a requested accuracy.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import linalg

from .errors import NotInvertible, NotProper, TruncationBudgetExceeded

#: roots closer than this to the unit circle are never accepted as proper
UNIT_CIRCLE_MARGIN = 1e-6


def _as_values(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError("sequence values must be one-dimensional")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128)
        if arr.size and not np.any(arr.imag):
            arr = arr.real.copy()
    else:
        arr = arr.astype(np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteSequence:
    """Finitely supported sequence ``x[n]``, ``n = offset .. offset+len-1``.

    Values are stored as given (no trimming of small entries) so that
    convolutions of exactly representable inputs stay exact.
    """

    offset: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "values", _as_values(self.values))

    @classmethod
    def delta(cls, at: int = 0, amplitude: complex = 1.0) -> "DiscreteSequence":
        return cls(at, [amplitude])

    @classmethod
    def empty(cls, offset: int = 0) -> "DiscreteSequence":
        return cls(offset, np.zeros(0))

    def __len__(self) -> int:
        return self.values.size

    @property
    def stop(self) -> int:
        """One past the last stored index."""
        return self.offset + self.values.size

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.stop)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def __getitem__(self, n: int):
        k = int(n) - self.offset
        if 0 <= k < self.values.size:
            return self.values[k]
        return self.values.dtype.type(0)

    def at(self, n) -> np.ndarray:
        """Vectorised lookup; indices outside the window give zero."""
        n = np.asarray(n, dtype=np.int64)
        k = n - self.offset
        inside = (k >= 0) & (k < self.values.size)
        out = np.zeros(n.shape, dtype=self.values.dtype)
        out[inside] = self.values[k[inside]]
        return out

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Values at ``lo..hi`` inclusive, zero-padded."""
        return self.at(np.arange(lo, hi + 1))

    def trim(self, tol: float = 0.0) -> "DiscreteSequence":
        """Drop leading and trailing entries with magnitude ``<= tol``."""
        keep = np.flatnonzero(np.abs(self.values) > tol)
        if keep.size == 0:
            return DiscreteSequence.empty(self.offset)
        lo, hi = keep[0], keep[-1] + 1
        return DiscreteSequence(self.offset + lo, self.values[lo:hi])

    def scaled(self, c) -> "DiscreteSequence":
        return DiscreteSequence(self.offset, self.values * c)

    def shifted(self, k: int) -> "DiscreteSequence":
        return DiscreteSequence(self.offset + k, self.values)

    def allclose(self, other: "DiscreteSequence", atol: float = 0.0) -> bool:
        lo = min(self.offset, other.offset)
        hi = max(self.stop, other.stop) - 1
        if hi < lo:
            return True
        return bool(np.all(np.abs(self.window(lo, hi) - other.window(lo, hi)) <= atol))

    def __repr__(self) -> str:
        return f"DiscreteSequence(offset={self.offset}, values={self.values.tolist()!r})"

    # -- serialisation ----------------------------------------------------
    def to_dict(self) -> dict:
        if self.is_real:
            vals = [float(v) for v in self.values]
        else:
            vals = [[float(v.real), float(v.imag)] for v in self.values]
        return {"offset": self.offset, "values": vals}

    @classmethod
    def from_dict(cls, d: dict) -> "DiscreteSequence":
        vals = [complex(v[0], v[1]) if isinstance(v, (list, tuple)) else v for v in d["values"]]
        return cls(int(d["offset"]), np.array(vals) if vals else np.zeros(0))

    def to_text(self) -> str:
        """Text form: ``offset k`` on the first line, values on the second."""
        if self.is_real:
            body = " ".join(repr(float(v)) for v in self.values)
        else:
            body = " ".join(repr(complex(v)).strip("()") for v in self.values)
        return f"offset {self.offset}\n{body}\n"

    @classmethod
    def from_text(cls, text: str) -> "DiscreteSequence":
        stripped = text.strip()
        if stripped.startswith("{"):
            return cls.from_dict(json.loads(stripped))
        lines = [ln for ln in stripped.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise ValueError("empty sequence text")
        head = lines[0].split()
        if len(head) < 2 or head[0] != "offset":
            raise ValueError("sequence text must start with 'offset <k>'")
        tokens = head[2:] + [tok for ln in lines[1:] for tok in ln.split()]
        vals = [complex(tok) if "j" in tok else float(tok) for tok in tokens]
        return cls(int(head[1]), np.array(vals) if vals else np.zeros(0))


SequenceLike = Union[DiscreteSequence, "ProperSequence"]


def _base(a) -> DiscreteSequence:
    return a.base if isinstance(a, ProperSequence) else a


@dataclass(frozen=True, eq=False)
class ProperSequence:
    """A sequence certified to have a bounded two-sided inverse."""

    base: DiscreteSequence
    tol: float
    roots: np.ndarray
    min_modulus: float

    @property
    def offset(self) -> int:
        return self.base.offset

    @property
    def values(self) -> np.ndarray:
        return self.base.values

    def __len__(self) -> int:
        return len(self.base)

    def __getitem__(self, n):
        return self.base[n]


def convolve(a: SequenceLike, b: SequenceLike) -> DiscreteSequence:
    """Linear convolution; the result starts at ``a.offset + b.offset``."""
    a, b = _base(a), _base(b)
    if len(a) == 0 or len(b) == 0:
        return DiscreteSequence.empty(a.offset + b.offset)
    return DiscreteSequence(a.offset + b.offset, np.convolve(a.values, b.values))


def hermitian_reverse(a: SequenceLike) -> DiscreteSequence:
    """``out[n] = conj(a[-n])``."""
    a = _base(a)
    vals = a.values[::-1]
    if not a.is_real:
        vals = np.conj(vals)
    return DiscreteSequence(-(a.stop - 1) if len(a) else -a.offset, vals)


def autocorrelation(a: SequenceLike) -> DiscreteSequence:
    """``hermitian_reverse(a) * a``; Hermitian about lag zero."""
    return convolve(hermitian_reverse(a), a)


def certify_proper(a: SequenceLike, tol: float = UNIT_CIRCLE_MARGIN, grid: int = 4096) -> ProperSequence:
    """Check that ``a`` has no z-transform zero on the unit circle.

    Both the polynomial roots and ``|A(e^{jw})|`` on a dense grid are
    examined; a root within ``max(tol, UNIT_CIRCLE_MARGIN)`` of the unit
    circle is rejected. Leading and trailing entries below machine precision
    relative to the largest one are dropped first.
    """
    if isinstance(a, ProperSequence):
        return a
    if tol <= 0:
        raise ValueError("tol must be positive")
    if len(a) == 0 or not np.all(np.isfinite(a.values)):
        raise NotProper("sequence is empty or non-finite")
    # end coefficients below rounding level would only add spurious huge or tiny roots
    core = a.trim(np.finfo(float).eps * float(np.max(np.abs(a.values))))
    if len(core) == 0:
        raise NotProper("sequence is zero")
    roots = np.roots(core.values) if len(core) > 1 else np.zeros(0, dtype=complex)
    margin = max(tol, UNIT_CIRCLE_MARGIN)
    bad = roots[np.abs(np.abs(roots) - 1.0) <= margin]
    w = np.exp(-2j * np.pi * np.arange(grid) / grid)
    modulus = np.abs(np.polyval(core.values[::-1], w))
    min_mod = float(modulus.min())
    if bad.size:
        raise NotProper(f"z-transform has {bad.size} zero(s) on the unit circle, e.g. {complex(bad[0]):.6g}")
    if min_mod <= np.finfo(float).eps * float(np.abs(core.values).sum()):
        raise NotProper("z-transform vanishes on the unit circle")
    return ProperSequence(core, float(tol), roots, min_mod)


def _geometric_factor(r: complex, budget: float) -> tuple[DiscreteSequence, int]:
    """Truncated inverse of ``1 - r z^-1`` with residual at most ``budget``."""
    mag = abs(r)
    if mag == 0.0:
        return DiscreteSequence(0, [1.0]), 0
    if mag < 1.0:
        n = max(0, math.ceil(math.log(budget) / math.log(mag)) - 1)
        powers = r ** np.arange(n + 1)
        return DiscreteSequence(0, powers), n
    rho = 1.0 / r
    n = max(1, math.ceil(math.log(budget) / math.log(abs(rho))))
    powers = -(rho ** np.arange(n, 0, -1))
    return DiscreteSequence(-n, powers), n


def _inverse_by_least_squares(core: DiscreteSequence, roots: np.ndarray, tol: float,
                              max_halfwidth: int) -> DiscreteSequence:
    """Inverse on a fixed window from the normal equations of ``a * g = delta``.

    The window is sized from the slowest-decaying root. The normal matrix is
    the Hermitian Toeplitz matrix of the autocorrelation of ``a``, so a
    Levinson solve suffices.
    """
    inside = np.abs(roots[np.abs(roots) < 1.0])
    outside = np.abs(roots[np.abs(roots) > 1.0])
    digits = math.log(tol) - 8.0  # a few extra decades for the polynomial factor of repeated decay

    def extent(rates, count):
        if rates.size == 0:
            return 0
        r = float(rates.max())
        return 0 if r == 0.0 else int(math.ceil(digits / math.log(r))) + 2 * count

    n_causal = extent(inside, inside.size)
    n_anti = extent(1.0 / outside if outside.size else outside, outside.size)
    lo, hi = -core.offset - n_anti, -core.offset + n_causal
    size = hi - lo + 1
    if size > 2 * max_halfwidth + 1:
        raise TruncationBudgetExceeded(
            f"inverse needs {size} taps at tol={tol:g}; limit is {2 * max_halfwidth + 1}")
    ac = autocorrelation(core)
    col = ac.window(0, size - 1)
    rhs = np.conj(core.at(-np.arange(lo, hi + 1)))
    g = linalg.solve_toeplitz((col, np.conj(col)), rhs)
    return DiscreteSequence(lo, g)


def _round_trip_error(core: DiscreteSequence, g: DiscreteSequence) -> float:
    residual = convolve(core, g)
    err = residual.values.copy()
    if residual.offset <= 0 < residual.stop:
        err[-residual.offset] -= 1.0
    else:
        return math.inf
    return float(np.max(np.abs(err)))


def invert_fir(a: SequenceLike, tol: float = 1e-12, max_halfwidth: int = 2000) -> DiscreteSequence:
    """Stable two-sided inverse of a finitely supported proper sequence.

    The z-transform is factored into first-order terms; zeros inside the
    unit circle give causal geometric tails and zeros outside give
    anti-causal ones. Each tail is cut once its terms drop below
    ``tol / (number of zeros)``, so that ``a * g`` equals the unit impulse
    to within ``tol`` in the max norm.

    When there are many zeros the cascade of factors can pass through
    coefficients far larger than the result and lose all precision (this
    happens, e.g., when inverting an already inverted sequence). If the
    round trip then misses ``tol``, the inverse is recomputed on a window
    sized from the slowest zero by solving the least-squares normal
    equations, and checked again.

    Raises
    ------
    NotInvertible
        If ``a`` has a zero on the unit circle.
    TruncationBudgetExceeded
        If the inverse needs more than ``2 * max_halfwidth + 1`` taps.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    try:
        proper = certify_proper(a)
    except NotProper as exc:
        raise NotInvertible(str(exc)) from exc
    core = proper.base
    real = core.is_real
    lead = core.values[0]
    roots = proper.roots
    npoles = max(1, roots.size)

    def finish(g):
        return DiscreteSequence(g.offset, np.real(g.values)) if real else g

    budget = tol / npoles
    limit = 2 * max_halfwidth + 1
    for _ in range(4):
        g = DiscreteSequence(-core.offset, [1.0 / lead])
        for r in roots:
            factor, _n = _geometric_factor(complex(r), budget)
            g = convolve(g, factor)
            if len(g) > limit:
                break
        if len(g) > limit:
            break
        g = finish(g)
        if _round_trip_error(core, g) <= tol:
            return g
        budget /= 10.0
    g = finish(_inverse_by_least_squares(core, roots, tol, max_halfwidth)).trim(tol * 1e-3)
    if _round_trip_error(core, g) <= tol:
        return g
    raise TruncationBudgetExceeded(f"could not reach round-trip accuracy {tol:g}")
