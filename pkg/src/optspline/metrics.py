"""Quality measures and the image-enlargement experiment.

``snr`` compares sampled functions, ``psnr`` compares images, and
:func:`experiment_report` runs the downsample/enlarge pipeline over a corpus
of images in three scenarios:

1. anti-aliased before decimation, scored against the original image;
2. anti-aliased before decimation, scored against the anti-aliased image;
3. plain decimation, scored against the original image.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .designer import (DesignProblem, FilterTarget, IdealLowpass, SignalTarget, default_rho_d,
                       design_kernel)
from .errors import DimensionMismatch, GridMismatch, OptsplineError
from .kernels import (DEFAULT_HALFWIDTH, DEFAULT_Q, DEFAULT_TOL, CompactKernel, SampledFunction,
                      hat_transform)
from .pnm import quantize
from .resample import (ANTIALIAS_HALFWIDTH, ImageBuffer, antialias, antialias_downsample,
                       baseline_kernels, enlarge_image)

log = logging.getLogger(__name__)

#: stands in for +inf dB in serialised output
INF_SENTINEL = 1e9

METHODS = ("bilinear", "bicubic", "opt_sinc", "opt_image")
SCENARIOS = (1, 2, 3)
IMAGE_EXTENSIONS = (".pgm", ".pnm", ".png")


def snr(reference: SampledFunction, estimate: SampledFunction,
        reference_energy: Optional[float] = None) -> float:
    """Signal-to-noise ratio in dB, ``10 log10(sum |ref|^2 / sum |ref - est|^2)``.

    Parameters
    ----------
    reference, estimate
        Functions on the same grid.
    reference_energy
        Total L2 energy of the reference over the whole line. When given, the
        part of it lying outside the common window counts as error (the
        estimate is taken as zero there) and replaces the in-window energy in
        the numerator.

    Returns ``math.inf`` when the error vanishes.
    """
    if not reference.same_grid(estimate):
        raise GridMismatch("reference and estimate are not sampled on the same grid")
    q = reference.q
    ref = reference.values
    num = float(np.sum(np.abs(ref) ** 2)) / q
    err = float(np.sum(np.abs(ref - estimate.values) ** 2)) / q
    if reference_energy is not None:
        err += max(float(reference_energy) - num, 0.0)
        num = float(reference_energy)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(num / err)


def hat_snr(k: CompactKernel, halfwidth: int = DEFAULT_HALFWIDTH, q: int = DEFAULT_Q, tol: float = DEFAULT_TOL,
            full_line: bool = True) -> float:
    """SNR of the interpolating form of ``k`` against ``sinc``.

    Both are sampled on ``[-halfwidth, halfwidth]``. With ``full_line`` the
    sinc energy outside the window is charged as error, which makes the
    figure an estimate of the whole-line SNR.
    """
    est = hat_transform(k, tol, halfwidth, q)
    ref = SampledFunction(est.start, q, np.sinc(est.t))
    return snr(ref, est, IdealLowpass.energy if full_line else None)


def psnr(reference, estimate, peak: float = 1.0) -> float:
    """Peak SNR in dB, ``10 log10(peak^2 / MSE)``; ``math.inf`` if identical."""
    a = reference.pixels if isinstance(reference, ImageBuffer) else np.asarray(reference, dtype=float)
    b = estimate.pixels if isinstance(estimate, ImageBuffer) else np.asarray(estimate, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def serial_db(x: float) -> float:
    """Replace +inf by the numeric sentinel."""
    return INF_SENTINEL if math.isinf(x) and x > 0 else float(x)


# -- experiment -------------------------------------------------------------

@dataclass
class ExperimentConfig:
    corpus: str = "."
    factor: int = 2
    scenarios: Sequence[int] = SCENARIOS
    methods: Sequence[str] = METHODS
    degree: int = 3
    tol: float = DEFAULT_TOL
    q: int = DEFAULT_Q
    antialias_halfwidth: int = ANTIALIAS_HALFWIDTH
    images: Optional[Sequence[tuple]] = None  # (name, array) pairs; overrides corpus

    def to_dict(self) -> dict:
        return {
            "corpus": self.corpus if self.images is None else "<in-memory>",
            "factor": self.factor,
            "scenarios": list(self.scenarios),
            "methods": list(self.methods),
            "degree": self.degree,
            "rho_d": default_rho_d(self.degree).to_dict(),
            "tol": self.tol,
            "Q": self.q,
            "antialias_halfwidth": self.antialias_halfwidth,
            "antialias_cutoff": 1.0 / (2 * self.factor),
        }


@dataclass
class ExperimentRow:
    image: str
    method: str
    scenario: int
    psnr_db: float
    psnr_db_8bit: float


@dataclass
class ExperimentReport:
    config: dict
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (image, message)
    images: list = field(default_factory=list)

    @property
    def status(self) -> str:
        if not self.images:
            return "empty"
        return "partial" if self.failures else "ok"

    def average(self, method: str, scenario: int, quantized: bool = False) -> float:
        vals = [r.psnr_db_8bit if quantized else r.psnr_db for r in self.rows
                if r.method == method and r.scenario == scenario]
        if not vals:
            return math.nan
        if any(math.isinf(v) for v in vals):
            return math.inf
        return float(np.mean(vals))

    def to_csv(self, quantized: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["image", "method", "scenario", "psnr_db"])
        for r in self.rows:
            val = r.psnr_db_8bit if quantized else r.psnr_db
            w.writerow([r.image, r.method, r.scenario, f"{serial_db(val):.6f}"])
        return buf.getvalue()

    def to_text(self, scenario: int, quantized: bool = False) -> str:
        """Aligned table: one row per image, one column per method."""
        methods = list(self.config["methods"])
        lookup = {(r.image, r.method): (r.psnr_db_8bit if quantized else r.psnr_db)
                  for r in self.rows if r.scenario == scenario}
        label = {1: "anti-aliased input, original reference",
                 2: "anti-aliased input, anti-aliased reference",
                 3: "no anti-aliasing, original reference"}.get(scenario, "")
        names = list(self.images) + ["Overall Average"]
        width = max([len(n) for n in names] + [5])
        cols = [max(len(m), 10) for m in methods]

        def fmt(x):
            if x is None or (isinstance(x, float) and math.isnan(x)):
                return "-"
            return "inf" if math.isinf(x) else f"{x:.2f}"

        lines = [f"Scenario {scenario}: {label}" + (" (8-bit)" if quantized else ""),
                 "  ".join(["Image".ljust(width)] + [m.rjust(c) for m, c in zip(methods, cols)])]
        for name in self.images:
            lines.append("  ".join([name.ljust(width)] + [fmt(lookup.get((name, m))).rjust(c)
                                                          for m, c in zip(methods, cols)]))
        lines.append("  ".join(["Overall Average".ljust(width)] + [fmt(self.average(m, scenario, quantized)).rjust(c)
                                                                     for m, c in zip(methods, cols)]))
        return "\n".join(lines) + "\n"


def list_corpus(path: str) -> list[str]:
    if not os.path.isdir(path):
        raise FileNotFoundError(f"corpus directory not found: {path}")
    names = [n for n in os.listdir(path) if os.path.splitext(n)[1].lower() in IMAGE_EXTENSIONS]
    return sorted(names)


def sinc_kernel(degree: int = 3, q: int = DEFAULT_Q, tol: float = DEFAULT_TOL) -> CompactKernel:
    return design_kernel(DesignProblem(degree, default_rho_d(degree), FilterTarget(IdealLowpass()), q=q, tol=tol))


def image_kernel(reference: np.ndarray, coarse: np.ndarray, factor: int, degree: int = 3,
                 tol: float = DEFAULT_TOL) -> CompactKernel:
    """Kernel fitted to reconstruct the rows of ``reference`` from ``coarse``.

    The rows of ``reference`` that survive decimation serve as fine-grid
    signals (spacing ``1 / factor``) and the rows of ``coarse`` as their
    lattice samples.
    """
    fine = reference[::factor, :]
    if fine.ndim == 3:  # channels become extra rows
        fine = np.moveaxis(fine, 2, 0).reshape(-1, fine.shape[1])
        coarse = np.moveaxis(coarse, 2, 0).reshape(-1, coarse.shape[1])
    target = SignalTarget.from_rows(fine, coarse, factor)
    return design_kernel(DesignProblem(degree, default_rho_d(degree), target, q=factor, tol=tol))


def _scenario_images(pix: np.ndarray, scenario: int, cfg: ExperimentConfig):
    """Return ``(reference, coarse)`` for one scenario."""
    f = cfg.factor
    if scenario == 3:
        coarse = antialias_downsample(pix, f, bypass=True).pixels
        return pix, coarse
    filtered = antialias(pix, f, halfwidth=cfg.antialias_halfwidth).pixels
    coarse = filtered[::f, ::f].copy()
    return (pix if scenario == 1 else filtered), coarse


def _load(cfg: ExperimentConfig) -> Iterable[tuple]:
    if cfg.images is not None:
        for name, arr in sorted(cfg.images, key=lambda p: p[0]):
            yield name, (lambda a=arr: np.asarray(a, dtype=float))
        return
    from .pnm import read_image

    for name in list_corpus(cfg.corpus):
        yield name, (lambda p=os.path.join(cfg.corpus, name): read_image(p)[0])


def experiment_report(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every scenario and method over the corpus.

    Failures on one image (unreadable file, image too small, ...) are
    recorded and the run continues.
    """
    report = ExperimentReport(cfg.to_dict())
    fixed = baseline_kernels()
    sinc = None
    for name, loader in _load(cfg):
        report.images.append(name)
        rows = []
        try:
            pix = loader()
            for scenario in cfg.scenarios:
                ref, coarse = _scenario_images(pix, scenario, cfg)
                ref_q = quantize(ref) / 255.0
                for method in cfg.methods:
                    if method in fixed:
                        k = fixed[method]
                    elif method == "opt_sinc":
                        if sinc is None:
                            sinc = sinc_kernel(cfg.degree, cfg.q, cfg.tol)
                        k = sinc
                    elif method == "opt_image":
                        k = image_kernel(ref, coarse, cfg.factor, cfg.degree, cfg.tol)
                    else:
                        raise ValueError(f"unknown method {method!r}")
                    out = enlarge_image(coarse, k, cfg.factor, cfg.tol).pixels
                    rows.append(ExperimentRow(
                        name, method, scenario, psnr(ref, out), psnr(ref_q, quantize(out) / 255.0)))
            report.rows.extend(rows)
        except (OptsplineError, OSError, ValueError) as exc:
            log.warning("image %s failed: %s", name, exc)
            report.failures.append((name, f"{type(exc).__name__}: {exc}"))
    return report
