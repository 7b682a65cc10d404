"""Compact-support kernels, B-splines and their interpolating (hat) forms.

A :class:`CompactKernel` of degree ``m`` lives on ``(0, m + 1)`` and is
stored as ``m + 1`` unit-length segments. Segment ``n`` holds the kernel on
``[n, n + 1)`` either as ascending power-basis coefficients in the local
variable ``u = t - n`` (``"poly"``) or as ``q + 1`` uniform samples including
both endpoints (``"sampled"``).

The hat transform turns a kernel into an interpolating function by
convolving it with the inverse of its integer samples.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import DegreeTooLarge, GridMismatch
from .seqalg import DiscreteSequence, certify_proper, invert_fir

MAX_DEGREE = 21
DEFAULT_Q = 64
DEFAULT_HALFWIDTH = 16
DEFAULT_TOL = 1e-10

# grid positions closer than this (in sample units) snap to the sample
_SNAP = 1e-7


def check_degree(m: int) -> int:
    if int(m) != m or m < 1 or m % 2 == 0:
        raise ValueError(f"degree must be a positive odd integer, got {m}")
    if m > MAX_DEGREE:
        raise DegreeTooLarge(f"degree {m} exceeds the supported maximum {MAX_DEGREE}")
    return int(m)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Function on the grid ``t_k = (start + k) / q``.

    ``start`` is an integer, so the integer lattice is always part of the
    grid. Values outside the stored window are taken as zero.
    """

    start: int
    q: int
    values: np.ndarray

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 1:
            raise ValueError("q must be a positive integer")
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "q", int(self.q))
        vals = np.asarray(self.values)
        vals = vals.astype(np.complex128 if np.iscomplexobj(vals) else np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, f: Callable, lo: float, hi: float, q: int) -> "SampledFunction":
        """Sample ``f`` at every grid point of ``[lo, hi]``."""
        i0, i1 = math.ceil(lo * q - _SNAP), math.floor(hi * q + _SNAP)
        idx = np.arange(i0, i1 + 1)
        return cls(i0, q, f(idx / q))

    @property
    def origin(self) -> float:
        return self.start / self.q

    @property
    def stop(self) -> int:
        return self.start + self.values.size

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.start, self.stop) / self.q

    def __len__(self) -> int:
        return self.values.size

    def same_grid(self, other: "SampledFunction") -> bool:
        return self.q == other.q and self.start == other.start and len(self) == len(other)

    def samples_at(self, idx) -> np.ndarray:
        """Values at absolute grid indices (zero outside the window)."""
        idx = np.asarray(idx, dtype=np.int64)
        k = idx - self.start
        inside = (k >= 0) & (k < self.values.size)
        out = np.zeros(idx.shape, dtype=self.values.dtype)
        out[inside] = self.values[k[inside]]
        return out

    def __call__(self, t) -> np.ndarray:
        """Piecewise-linear evaluation, exact at grid points."""
        pos = np.asarray(t, dtype=np.float64) * self.q
        pos = _snap(pos)
        base = np.floor(pos).astype(np.int64)
        frac = pos - base
        return self.samples_at(base) * (1.0 - frac) + self.samples_at(base + 1) * frac

    def lattice(self, phase: int = 0) -> DiscreteSequence:
        """The subsequence ``x[n] = f(n + phase / q)``."""
        first = -((self.start - phase) // -self.q)  # ceil((start - phase) / q)
        last = (self.stop - 1 - phase) // self.q
        if last < first:
            return DiscreteSequence.empty(first)
        return DiscreteSequence(first, self.samples_at(np.arange(first, last + 1) * self.q + phase))

    def restrict(self, lo: float, hi: float) -> "SampledFunction":
        i0, i1 = math.ceil(lo * self.q - _SNAP), math.floor(hi * self.q + _SNAP)
        idx = np.arange(i0, i1 + 1)
        return SampledFunction(i0, self.q, self.samples_at(idx))

    def energy(self) -> float:
        """Rectangle-rule L2 energy, ``sum |f|^2 / q``."""
        return float(np.sum(np.abs(self.values) ** 2) / self.q)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "value"])
        for tk, v in zip(self.t, self.values):
            w.writerow([repr(float(tk)), repr(complex(v)) if np.iscomplexobj(self.values) else repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SampledFunction":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] and rows[0][0].strip().lower() == "t":
            rows = rows[1:]
        rows = [r for r in rows if r]
        if len(rows) < 2:
            raise ValueError("need at least two samples to infer the grid")
        t = np.array([float(r[0]) for r in rows])
        vals = [complex(r[1].strip("()")) if "j" in r[1] else float(r[1]) for r in rows]
        q = int(round(1.0 / (t[1] - t[0])))
        idx = np.round(t * q)
        if np.max(np.abs(t * q - idx)) > 1e-6 or np.any(np.diff(idx) != 1):
            raise GridMismatch("CSV samples are not on a uniform grid with integer lattice")
        return cls(int(idx[0]), q, np.array(vals))


def _snap(pos: np.ndarray) -> np.ndarray:
    near = np.round(pos)
    return np.where(np.abs(pos - near) < _SNAP, near, pos)


@dataclass(frozen=True, eq=False)
class CompactKernel:
    """Kernel of degree ``m`` supported on ``(0, m + 1)``."""

    degree: int
    representation: str
    segments: np.ndarray
    integer_samples: DiscreteSequence
    q: Optional[int] = None
    name: str = ""
    metadata: dict = field(default_factory=dict)
    symmetric: bool = False  # k(t) == k(m + 1 - t); evaluated from the left half

    def __post_init__(self):
        m = int(self.degree)
        seg = np.array(self.segments, dtype=np.float64)
        if self.representation == "poly":
            if seg.shape[0] != m + 1:
                raise ValueError("poly kernel needs m + 1 segments")
        elif self.representation == "sampled":
            if self.q is None or seg.shape != (m + 1, int(self.q) + 1):
                raise ValueError("sampled kernel needs segments of shape (m + 1, q + 1)")
            object.__setattr__(self, "q", int(self.q))
        else:
            raise ValueError(f"unknown representation {self.representation!r}")
        seg.setflags(write=False)
        object.__setattr__(self, "segments", seg)
        object.__setattr__(self, "degree", m)

    @property
    def support(self) -> tuple[int, int]:
        return 0, self.degree + 1

    def __call__(self, t) -> np.ndarray:
        return kernel_eval(self, t)

    def grid_samples(self, q: int) -> np.ndarray:
        """Values at ``i / q`` for ``i = 0 .. (m + 1) q``."""
        return kernel_eval(self, np.arange((self.degree + 1) * q + 1) / q)

    def sampled(self, q: int) -> "CompactKernel":
        """Sampled representation on the grid of spacing ``1 / q``."""
        if self.representation == "sampled" and self.q == q:
            return self
        vals = self.grid_samples(q)
        m = self.degree
        segs = np.stack([vals[n * q:(n + 1) * q + 1] for n in range(m + 1)])
        return CompactKernel(m, "sampled", segs, self.integer_samples, q=q, name=self.name,
                             metadata=dict(self.metadata), symmetric=self.symmetric)

    def with_segments(self, segments: np.ndarray) -> "CompactKernel":
        return CompactKernel(self.degree, self.representation, segments, self.integer_samples,
                             q=self.q, name=self.name, metadata=dict(self.metadata), symmetric=self.symmetric)

    def to_dict(self) -> dict:
        d = {
            "degree": self.degree,
            "representation": self.representation,
            "segments": [[float(v) for v in row] for row in self.segments],
            "integer_samples": self.integer_samples.to_dict(),
        }
        if self.q is not None:
            d["Q"] = self.q
        if self.name:
            d["name"] = self.name
        if self.metadata:
            d["metadata"] = self.metadata
        if self.symmetric:
            d["symmetric"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CompactKernel":
        return cls(
            int(d["degree"]),
            d["representation"],
            np.array(d["segments"], dtype=np.float64),
            DiscreteSequence.from_dict(d["integer_samples"]),
            q=d.get("Q"),
            name=d.get("name", ""),
            metadata=d.get("metadata", {}),
            symmetric=bool(d.get("symmetric", False)),
        )


def kernel_eval(k: CompactKernel, t) -> np.ndarray:
    """Evaluate ``k`` at ``t``; zero outside ``(0, m + 1)``.

    Poly kernels use Horner's rule on the segment ``floor(t)``; sampled
    kernels interpolate linearly between adjacent grid samples. Symmetric
    kernels are evaluated at ``min(t, m + 1 - t)``, which keeps the tiny
    values near the right end of the support free of cancellation.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    m = k.degree
    out = np.zeros(t.shape)
    inside = (t > 0) & (t < m + 1)
    if k.symmetric:
        t = np.where(t > (m + 1) / 2, (m + 1) - t, t)
    if k.representation == "poly":
        ti = t[inside]
        n = np.minimum(np.floor(ti).astype(np.int64), m)
        u = ti - n
        coef = k.segments[n]
        acc = coef[:, -1].copy()
        for c in range(coef.shape[1] - 2, -1, -1):
            acc = acc * u + coef[:, c]
        out[inside] = acc
    else:
        q = k.q
        pos = _snap(t[inside] * q)
        base = np.floor(pos).astype(np.int64)
        frac = pos - base
        n = np.minimum(base // q, m)
        i = base - n * q
        # a point exactly on the right end of segment m never reaches here (t < m + 1)
        nxt = np.minimum(i + 1, q)
        out[inside] = k.segments[n, i] * (1.0 - frac) + k.segments[n, nxt] * frac
    return out[0] if scalar else out


def bspline_eval(m: int, t):
    """Polynomial B-spline of odd degree ``m`` on ``(0, m + 1)``.

    Evaluated with the one-sided power formula
    ``sum_n (-1)^n C(m+1, n) (t - n)_+^m / m!``.
    """
    m = check_degree(m)
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros(t.shape)
    # the spline is symmetric about (m + 1) / 2; the left half needs fewer, smaller terms
    t = np.where(t > (m + 1) / 2, (m + 1) - t, t)
    for n in range(m + 2):
        d = t - n
        out += (-1) ** n * math.comb(m + 1, n) * np.where(d > 0, d, 0.0) ** m
    out /= math.factorial(m)
    out = np.where((t > 0) & (t < m + 1), out, 0.0)
    return float(out) if out.ndim == 0 else out


def _bspline_segments(m: int) -> list[list[Fraction]]:
    """Exact power-basis coefficients of each unit segment of the B-spline."""
    fact = math.factorial(m)
    segs = []
    for n in range(m + 1):
        coef = [Fraction(0)] * (m + 1)
        for k in range(n + 1):
            sign = -1 if k % 2 else 1
            c = n - k
            w = Fraction(sign * math.comb(m + 1, k), fact)
            for i in range(m + 1):
                coef[i] += w * math.comb(m, i) * Fraction(c) ** (m - i)
        segs.append(coef)
    return segs


def bspline_kernel(m: int) -> CompactKernel:
    """B-spline of degree ``m`` as an exact piecewise-polynomial kernel."""
    m = check_degree(m)
    segs = _bspline_segments(m)
    coef = np.array([[float(c) for c in row] for row in segs])
    samples = DiscreteSequence(1, [float(segs[n][0]) for n in range(1, m + 1)])
    return CompactKernel(m, "poly", coef, samples, name=f"bspline{m}", symmetric=True)


def derivative_jumps(k: CompactKernel, order: int) -> np.ndarray:
    """Jumps of the ``order``-th derivative at the knots ``0 .. m + 1``.

    Only defined for poly kernels. Outside the support the kernel is zero,
    so the outer knots compare against zero.
    """
    if k.representation != "poly":
        raise ValueError("derivative jumps need an exact polynomial kernel")
    m = k.degree
    polys = [np.polynomial.Polynomial(row).deriv(order) for row in k.segments]
    left = [0.0] + [float(p(1.0)) for p in polys]
    right = [float(p(0.0)) for p in polys] + [0.0]
    return np.array(right) - np.array(left)


def hat_values(k: CompactKernel, t, g: DiscreteSequence) -> np.ndarray:
    """``sum_j g[j] k(t - j)`` at arbitrary points ``t``."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros(t.shape, dtype=np.result_type(g.values, np.float64))
    for j, gj in zip(g.indices, g.values):
        out += gj * kernel_eval(k, t - j)
    return out


def expand_coefficients(coef: DiscreteSequence, ksamp: np.ndarray, q: int) -> SampledFunction:
    """``sum_j coef[j] k(t - j)`` over its whole support on the grid of spacing ``1 / q``.

    ``ksamp`` holds the kernel at ``i / q`` for ``i = 0 .. (m + 1) q``.
    """
    span = ksamp.size
    if len(coef) == 0:
        return SampledFunction(coef.offset * q, q, np.zeros(0))
    out = np.zeros((len(coef) - 1) * q + span, dtype=np.result_type(coef.values, ksamp))
    for i, c in enumerate(coef.values):
        out[i * q:i * q + span] += c * ksamp
    return SampledFunction(coef.offset * q, q, out)


def prefilter_taps(k: CompactKernel, tol: float = DEFAULT_TOL) -> DiscreteSequence:
    """Inverse of the kernel's integer samples."""
    return invert_fir(certify_proper(k.integer_samples), tol)


def hat_transform(k: CompactKernel, tol: float = DEFAULT_TOL, halfwidth: int = DEFAULT_HALFWIDTH,
                  q: int = DEFAULT_Q) -> SampledFunction:
    """Interpolating counterpart of ``k`` sampled on ``[-halfwidth, halfwidth]``.

    Computes ``sum_j g[j] k(t - j)`` with ``g`` the inverse of the kernel's
    integer samples, so the result equals the unit impulse on the integers.
    """
    m = k.degree
    if halfwidth < m + 1:
        raise ValueError(f"halfwidth must be at least m + 1 = {m + 1}")
    g = prefilter_taps(k, tol)
    ksamp = k.grid_samples(q)
    lo = -halfwidth * q
    n_out = 2 * halfwidth * q + 1
    out = np.zeros(n_out, dtype=np.result_type(g.values, np.float64))
    span = ksamp.size
    for j, gj in zip(g.indices, g.values):
        a = j * q - lo  # output index of kernel sample 0
        s0, s1 = max(a, 0), min(a + span, n_out)
        if s0 < s1:
            out[s0:s1] += gj * ksamp[s0 - a:s1 - a]
    return SampledFunction(lo, q, out)


def cardinal_spline(m: int, tol: float = DEFAULT_TOL, halfwidth: int = DEFAULT_HALFWIDTH,
                    q: int = DEFAULT_Q) -> SampledFunction:
    """Cardinal spline of degree ``m`` (the hat transform of the B-spline)."""
    return hat_transform(bspline_kernel(m), tol, halfwidth, q)
