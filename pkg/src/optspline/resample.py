"""Applying kernels: 1-D interpolation and separable image enlargement.

Interpolation with a kernel ``k`` whose integer samples are ``k_d`` is a
two-step affair: the data are first filtered with the inverse of ``k_d``
(the prefilter) and the resulting coefficients weight shifted copies of
``k``. For images both steps are folded into one polyphase filter whose taps
are samples of the hat kernel, applied along rows and then columns of a
mirror-extended image.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ImageTooSmall
from .kernels import (DEFAULT_TOL, CompactKernel, SampledFunction, bspline_kernel,
                      expand_coefficients, hat_values, prefilter_taps)
from .seqalg import DiscreteSequence, convolve

#: one-sided length of the truncated-sinc anti-alias filter
ANTIALIAS_HALFWIDTH = 32


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """Intensity image, ``(height, width)`` or ``(height, width, channels)``.

    Pixels are kept as floats (nominally in ``[0, 1]``); ``bit_depth`` only
    matters when the image is written out.
    """

    pixels: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        pix = np.asarray(self.pixels, dtype=np.float64)
        if pix.ndim not in (2, 3) or pix.shape[0] < 1 or pix.shape[1] < 1:
            raise ValueError("image must be a non-empty 2-D (or 2-D x channels) array")
        if not np.all(np.isfinite(pix)):
            raise ValueError("image intensities must be finite")
        object.__setattr__(self, "pixels", pix)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple:
        return self.pixels.shape

    @classmethod
    def read(cls, path: str) -> "ImageBuffer":
        from .pnm import read_image

        pix, depth = read_image(path)
        return cls(pix, depth)

    def write(self, path: str) -> None:
        from .pnm import write_image

        write_image(path, self.pixels, self.bit_depth)


def _as_image(img) -> ImageBuffer:
    return img if isinstance(img, ImageBuffer) else ImageBuffer(img)


def _per_channel(pix: np.ndarray, fn) -> np.ndarray:
    if pix.ndim == 2:
        return fn(pix)
    return np.stack([fn(pix[..., c]) for c in range(pix.shape[2])], axis=-1)


# -- 1-D ------------------------------------------------------------------

def kernel_center(k: CompactKernel) -> int:
    """Midpoint of the support ``(0, m + 1)``; an integer for odd ``m``."""
    return (k.degree + 1) // 2


def prefilter(x_d: DiscreteSequence, k: CompactKernel, tol: float = DEFAULT_TOL) -> DiscreteSequence:
    """Coefficients ``c`` with ``sum_n c[n] k(t - n + center)`` interpolating ``x_d``.

    Coefficients are indexed against the centred kernel, so an interpolating
    kernel (or the linear B-spline) gives ``c = x_d``. The data are taken as
    zero outside their window.
    """
    return convolve(prefilter_taps(k, tol), x_d).shifted(kernel_center(k))


def interpolate_1d(x_d: DiscreteSequence, k: CompactKernel, q: int, tol: float = DEFAULT_TOL) -> SampledFunction:
    """Interpolate ``x_d`` with kernel ``k`` onto the grid of spacing ``1 / q``."""
    coef = prefilter(x_d, k, tol).shifted(-kernel_center(k))
    return expand_coefficients(coef, k.grid_samples(q), q)


# -- images ---------------------------------------------------------------

def enlargement_taps(k: CompactKernel, factor: int, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, int]:
    """Polyphase taps of the hat kernel for zooming by ``factor``.

    Returns ``(taps, first)`` where ``taps[p, j]`` is the weight of input
    sample ``i + first + j`` in output ``factor * i + p``, i.e. the hat kernel
    at ``p / factor - (first + j)``. The whole support of the hat kernel is
    kept; its length is set by how far the prefilter tail was carried.
    """
    g = prefilter_taps(k, tol)
    first = -(g.stop - 1 + k.degree)
    last = -g.offset
    shifts = np.arange(first, last + 1)
    phases = np.arange(factor) / factor
    t = phases[:, None] - shifts[None, :]
    taps = hat_values(k, t, g)
    return np.real_if_close(taps).astype(np.float64), first


def _filter_rows(x: np.ndarray, taps: np.ndarray, first: int, backend=None) -> np.ndarray:
    n = x.shape[1]
    index = _backend.mirror_index(n, first, n - 1 + first + taps.shape[1] - 1)
    return _backend.polyphase_rows(x, taps, index, backend=backend)


def _check_size(pix: np.ndarray, need: int, what: str):
    if pix.shape[0] < need or pix.shape[1] < need:
        raise ImageTooSmall(f"image {pix.shape[1]}x{pix.shape[0]} is smaller than {need} pixels needed for {what}")


def enlarge_image(img, k: CompactKernel, factor: int, tol: float = DEFAULT_TOL, order: str = "rows",
                  backend=None) -> ImageBuffer:
    """Zoom by an integer ``factor`` with separable kernel interpolation.

    Each line is interpolated at the ``factor`` phases ``0, 1/factor, ...``
    after every input sample, with the image mirrored (edge sample not
    repeated) beyond its borders. ``order`` selects whether rows or columns
    are processed first; the two orders agree to rounding.
    """
    img = _as_image(img)
    factor = int(factor)
    if factor < 2:
        raise ValueError("factor must be at least 2")
    if order not in ("rows", "cols"):
        raise ValueError("order must be 'rows' or 'cols'")
    _check_size(img.pixels, k.degree + 1, f"a degree-{k.degree} kernel")
    taps, first = enlargement_taps(k, factor, tol)

    def along_rows(a):
        return _filter_rows(a, taps, first, backend)

    def along_cols(a):
        return _filter_rows(a.T, taps, first, backend).T

    def run(a):
        if order == "rows":
            return along_cols(along_rows(a))
        return along_rows(along_cols(a))

    return ImageBuffer(_per_channel(img.pixels, run), img.bit_depth)


def overshoot_bound(k: CompactKernel, factor: int, tol: float = DEFAULT_TOL) -> float:
    """Largest gain of the enlargement operator in the max norm.

    For one pass this is the worst phase's ℓ1 tap sum; the separable
    operator's bound is its square.
    """
    taps, _ = enlargement_taps(k, factor, tol)
    return float(np.max(np.sum(np.abs(taps), axis=1)) ** 2)


def antialias_taps(factor: int, cutoff: float | None = None, halfwidth: int = ANTIALIAS_HALFWIDTH) -> np.ndarray:
    """Truncated ideal lowpass ``2 c sinc(2 c n)``, ``|n| <= halfwidth``.

    ``cutoff`` is in cycles per pixel and defaults to ``1 / (2 factor)``. The
    taps are rescaled to sum to one so constants pass unchanged.
    """
    c = 1.0 / (2 * factor) if cutoff is None else float(cutoff)
    if not 0 < c <= 0.5:
        raise ValueError("cutoff must lie in (0, 0.5]")
    n = np.arange(-halfwidth, halfwidth + 1)
    h = 2 * c * np.sinc(2 * c * n)
    return h / h.sum()


def antialias(img, factor: int, cutoff: float | None = None, halfwidth: int = ANTIALIAS_HALFWIDTH,
              backend=None) -> ImageBuffer:
    """Separable lowpass filtering with mirrored borders, no decimation."""
    img = _as_image(img)
    taps = antialias_taps(factor, cutoff, halfwidth)[None, :]

    def run(a):
        a = _filter_rows(a, taps, -halfwidth, backend)
        return _filter_rows(a.T, taps, -halfwidth, backend).T

    return ImageBuffer(_per_channel(img.pixels, run), img.bit_depth)


def antialias_downsample(img, factor: int, cutoff: float | None = None, bypass: bool = False,
                         halfwidth: int = ANTIALIAS_HALFWIDTH, backend=None) -> ImageBuffer:
    """Lowpass (unless ``bypass``) and keep every ``factor``-th pixel."""
    img = _as_image(img)
    factor = int(factor)
    if factor < 1:
        raise ValueError("factor must be positive")
    _check_size(img.pixels, factor, f"decimation by {factor}")
    if img.height % factor or img.width % factor:
        raise ValueError(f"factor {factor} does not divide the image size {img.width}x{img.height}")
    src = img if bypass else antialias(img, factor, cutoff, halfwidth, backend)
    return ImageBuffer(src.pixels[::factor, ::factor].copy(), img.bit_depth)


# -- reference kernels ----------------------------------------------------

def keys_kernel(a: float = -0.5) -> CompactKernel:
    """Keys' cubic convolution kernel shifted onto ``(0, 4)``.

    It interpolates by itself, so its integer samples are a unit impulse at
    2 and the prefilter is a pure shift.
    """
    P = np.polynomial.Polynomial
    u = P([0.0, 1.0])

    def inner(s):  # |s| <= 1
        return (a + 2) * s ** 3 - (a + 3) * s ** 2 + 1

    def outer(s):  # 1 < |s| < 2
        return a * s ** 3 - 5 * a * s ** 2 + 8 * a * s - 4 * a

    pieces = [outer(2 - u), inner(1 - u), inner(u), outer(1 + u)]
    segs = np.array([np.pad(p.coef, (0, 4 - p.coef.size)) for p in pieces])
    return CompactKernel(3, "poly", segs, DiscreteSequence(1, [0.0, 1.0, 0.0]), name="keys", symmetric=True)


def baseline_kernels() -> dict[str, CompactKernel]:
    """Bilinear (linear B-spline) and bicubic (Keys, ``a = -0.5``)."""
    bilinear = bspline_kernel(1)
    bilinear = CompactKernel(1, "poly", bilinear.segments, bilinear.integer_samples, name="bilinear",
                             symmetric=True)
    return {"bilinear": bilinear, "bicubic": keys_kernel(-0.5)}
