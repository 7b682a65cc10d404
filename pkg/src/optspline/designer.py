"""Least-squares design of compact-support kernels.

Given integer samples ``rho_d`` (supported on ``1..m``) and either a target
filter ``h`` with the interpolation property or a reference signal ``x``,
find the kernel ``rho`` on ``(0, m + 1)`` whose interpolating form best
matches the target in L2. Splitting ``rho`` into unit segments turns the
stationarity condition into one small Hermitian Toeplitz system

    sum_j v[n - j] R_j(t) = W_n(t),   n = 0..m,   t in [0, 1)

that is shared by every grid point ``t``. ``v`` is the autocorrelation of
the inverse of ``rho_d`` (times that of the reference samples for signal
targets) and ``W_n`` are unit slices of the correlated target.
"""
from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import linalg

from .errors import (DegenerateSignal, GridMisaligned, InfeasiblePerturbation,
                     NotPositiveDefinite)
from .kernels import (DEFAULT_HALFWIDTH, DEFAULT_Q, DEFAULT_TOL, CompactKernel,
                      SampledFunction, bspline_eval, check_degree,
                      expand_coefficients)
from .seqalg import (DiscreteSequence, ProperSequence, autocorrelation, certify_proper,
                     convolve, hermitian_reverse, invert_fir)

log = logging.getLogger(__name__)

#: integer samples used for the cubic sinc design unless overridden
DEFAULT_RHO3 = (0.235, 0.484, 0.235)

INTERPOLATION_TOL = 1e-6
STATIONARITY_EPS = 1e-5


def default_rho_d(m: int) -> DiscreteSequence:
    """Default integer samples: tuned values for ``m = 3``, B-spline samples otherwise."""
    m = check_degree(m)
    if m == 3:
        return DiscreteSequence(1, DEFAULT_RHO3)
    return DiscreteSequence(1, bspline_eval(m, np.arange(1, m + 1)))


@dataclass(frozen=True)
class IdealLowpass:
    """``h(t) = sinc(t)``; unit L2 energy."""

    def __call__(self, t):
        return np.sinc(t)

    energy: float = 1.0


@dataclass(frozen=True)
class FilterTarget:
    h: Union[IdealLowpass, SampledFunction]


@dataclass(frozen=True)
class SignalTarget:
    """Reference signals ``x`` on a fine grid with their lattice samples ``x_d``.

    Several ``(x, x_d)`` pairs may be given (e.g. image rows); their errors add.
    """

    signals: tuple

    @classmethod
    def from_signal(cls, x: SampledFunction, x_d: Optional[DiscreteSequence] = None) -> "SignalTarget":
        return cls(((x, x.lattice(0) if x_d is None else x_d),))

    @classmethod
    def from_rows(cls, fine_rows: np.ndarray, coarse_rows: np.ndarray, q: int) -> "SignalTarget":
        """Rows of a fine image (spacing ``1/q``) paired with coarse rows (spacing 1)."""
        pairs = tuple(
            (SampledFunction(0, q, np.asarray(f, dtype=float)), DiscreteSequence(0, np.asarray(c, dtype=float)))
            for f, c in zip(fine_rows, coarse_rows)
        )
        return cls(pairs)


Target = Union[FilterTarget, SignalTarget]


def _regrid(f: SampledFunction, q: int) -> SampledFunction:
    if f.q == q:
        return f
    if f.q % q:
        raise GridMisaligned(f"target grid q={f.q} is not a multiple of design q={q}")
    step = f.q // q
    first = -((f.start) // -step)
    idx = np.arange(first * step, f.stop, step)
    return SampledFunction(first, q, f.samples_at(idx))


@dataclass(frozen=True, eq=False)
class DesignProblem:
    degree: int
    rho_d: ProperSequence
    target: Target
    q: int = DEFAULT_Q
    tol: float = DEFAULT_TOL
    halfwidth: int = DEFAULT_HALFWIDTH

    def __post_init__(self):
        m = check_degree(self.degree)
        if self.q < 2:
            raise ValueError("q must be at least 2")
        rho = certify_proper(self.rho_d)
        if rho.offset < 1 or rho.base.stop - 1 > m:
            raise ValueError(f"rho_d must be supported within 1..{m}")
        object.__setattr__(self, "rho_d", rho)
        target = self.target
        if isinstance(target, FilterTarget) and isinstance(target.h, SampledFunction):
            h = _regrid(target.h, self.q)
            lat = h.lattice(0)
            err = np.abs(lat.values.astype(complex))
            if lat.offset <= 0 < lat.stop:
                err[-lat.offset] = abs(lat[0] - 1.0)
            if err.size and err.max() > INTERPOLATION_TOL:
                raise ValueError("filter target lacks the interpolation property (h(n) != delta[n])")
            target = FilterTarget(h)
        elif isinstance(target, SignalTarget):
            pairs = []
            for x, x_d in target.signals:
                pairs.append((_regrid(x, self.q), x_d))
            target = SignalTarget(tuple(pairs))
        elif not isinstance(target, FilterTarget):
            raise TypeError("target must be a FilterTarget or SignalTarget")
        object.__setattr__(self, "target", target)

    @property
    def mode(self) -> str:
        if isinstance(self.target, SignalTarget):
            return "signal"
        return "sinc" if isinstance(self.target.h, IdealLowpass) else "filter"

    def config(self) -> dict:
        return {
            "degree": self.degree,
            "rho_d": self.rho_d.base.to_dict(),
            "mode": self.mode,
            "Q": self.q,
            "tol": self.tol,
            "halfwidth": self.halfwidth,
        }

    @classmethod
    def from_dict(cls, d: dict, base_dir: str = ".") -> "DesignProblem":
        m = int(d["degree"])
        rho = DiscreteSequence.from_dict(d["rho_d"]) if d.get("rho_d") else default_rho_d(m)
        mode = d.get("mode", "sinc")
        if mode == "sinc":
            target = FilterTarget(IdealLowpass())
        elif mode in ("filter", "signal"):
            path = d.get("target_path")
            if not path:
                raise ValueError(f"mode {mode!r} needs target_path")
            with open(os.path.join(base_dir, path)) as fh:
                f = SampledFunction.from_csv(fh.read())
            target = FilterTarget(f) if mode == "filter" else SignalTarget.from_signal(f)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        return cls(m, rho, target, q=int(d.get("Q", DEFAULT_Q)), tol=float(d.get("tol", DEFAULT_TOL)),
                   halfwidth=int(d.get("halfwidth", DEFAULT_HALFWIDTH)))

    @classmethod
    def from_json(cls, path: str) -> "DesignProblem":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), base_dir=os.path.dirname(os.path.abspath(path)))


@dataclass(frozen=True, eq=False)
class ToeplitzSystem:
    """``V R(t) = W(t)`` with ``V = [v[i - j]]`` Hermitian Toeplitz."""

    v: DiscreteSequence
    rhs: np.ndarray  # (m + 1, q): W_n at t = k / q

    @property
    def matrix(self) -> np.ndarray:
        m = self.rhs.shape[0] - 1
        col = self.v.window(0, m)
        return linalg.toeplitz(col, np.conj(col))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())


def _inverse(p: DesignProblem) -> DiscreteSequence:
    return invert_fir(p.rho_d, p.tol)


def build_v(p: DesignProblem, g: Optional[DiscreteSequence] = None) -> DiscreteSequence:
    """Lags ``-m..m`` of the system sequence ``v``.

    Negative lags are filled as conjugates of the positive ones, so the
    resulting matrix is exactly Hermitian.
    """
    m = p.degree
    g = _inverse(p) if g is None else g
    v = autocorrelation(g)
    if isinstance(p.target, SignalTarget):
        acc = None
        for _x, x_d in p.target.signals:
            ac = autocorrelation(x_d)
            acc = ac if acc is None else _add(acc, ac)
        if acc is None or len(acc) == 0 or abs(acc[0]) == 0:
            raise DegenerateSignal("reference samples have zero energy")
        v = convolve(acc, v)
    pos = v.window(0, m)
    if np.iscomplexobj(pos):
        pos = pos.copy()
        pos[0] = pos[0].real
    vals = np.concatenate([np.conj(pos[:0:-1]), pos])
    return DiscreteSequence(-m, vals)


def _add(a: DiscreteSequence, b: DiscreteSequence) -> DiscreteSequence:
    lo, hi = min(a.offset, b.offset), max(a.stop, b.stop) - 1
    return DiscreteSequence(lo, a.window(lo, hi) + b.window(lo, hi))


def build_w(p: DesignProblem, g: Optional[DiscreteSequence] = None) -> np.ndarray:
    """Right-hand side slices ``W[n, k] = w(n + k / q)``, shape ``(m + 1, q)``."""
    m, q = p.degree, p.q
    g = _inverse(p) if g is None else g
    target = p.target
    W = np.zeros((m + 1, q), dtype=np.result_type(g.values, np.float64))
    if isinstance(target, FilterTarget) and isinstance(target.h, IdealLowpass):
        s = (np.arange((m + 1) * q) / q)[:, None]
        vals = target.h(s + g.indices[None, :]) @ np.conj(g.values)
        return vals.reshape(m + 1, q)
    if isinstance(target, FilterTarget):
        pairs = [(target.h, g)]
    else:
        pairs = [(x, convolve(x_d, g)) for x, x_d in target.signals]
    for x, a in pairs:
        rev = hermitian_reverse(a)
        for k in range(q):
            W[:, k] += convolve(rev, x.lattice(k)).window(0, m)
    return W


def solve_segments(sys: ToeplitzSystem) -> tuple[np.ndarray, float]:
    """Solve for every grid point with one Cholesky factorisation.

    Returns the segment samples ``R`` (shape ``(m + 1, q)``) and the max-norm
    residual ``|V R - W|``.
    """
    V = sys.matrix
    lam = np.linalg.eigvalsh(V)
    if lam.min() <= 1e-14 * max(abs(lam.max()), 1.0):
        raise NotPositiveDefinite(f"Toeplitz matrix not positive definite (min eigenvalue {lam.min():.3e})",
                                  float(lam.min()))
    factor = linalg.cho_factor(V, lower=True)
    R = linalg.cho_solve(factor, sys.rhs)
    residual = float(np.max(np.abs(V @ R - sys.rhs))) if sys.rhs.size else 0.0
    return R, residual


@dataclass
class DesignResult:
    kernel: CompactKernel
    system: ToeplitzSystem
    residual: float
    report: dict = field(default_factory=dict)


def _real_if_close(a: np.ndarray, what: str) -> np.ndarray:
    if not np.iscomplexobj(a):
        return a
    if np.max(np.abs(a.imag), initial=0.0) > 1e-9 * max(1.0, float(np.max(np.abs(a.real), initial=0.0))):
        raise ValueError(f"{what} is complex; only real kernels are supported")
    return a.real.copy()


def assemble_kernel(p: DesignProblem, R: np.ndarray) -> CompactKernel:
    """Join segment samples into a sampled kernel.

    Lattice points are set to ``rho_d`` exactly; the L2 solution is free on
    that measure-zero set.
    """
    m, q = p.degree, p.q
    R = _real_if_close(R, "kernel")
    rho = p.rho_d.base
    lattice = _real_if_close(np.array([rho[n] for n in range(m + 2)]), "rho_d")
    segs = np.empty((m + 1, q + 1))
    segs[:, :q] = R
    segs[:, 0] = lattice[:m + 1]
    segs[:, q] = lattice[1:m + 2]
    return CompactKernel(m, "sampled", segs, DiscreteSequence(rho.offset, lattice[rho.offset:rho.stop]), q=q)


def design(p: DesignProblem, stationarity_trials: int = 0) -> DesignResult:
    """Run the full design and return the kernel with diagnostics."""
    g = _inverse(p)
    system = ToeplitzSystem(build_v(p, g), build_w(p, g))
    R, residual = solve_segments(system)
    kernel = assemble_kernel(p, R)
    report = {
        "config": p.config(),
        "v_d": [float(np.real(x)) for x in system.v.window(0, p.degree)],
        "min_eigenvalue": system.min_eigenvalue,
        "residual_max": residual,
        "inverse_taps": len(g),
        "error_functional": error_functional(kernel, p),
    }
    if stationarity_trials:
        report["stationarity"] = check_stationarity(kernel, p, stationarity_trials)
    kernel = CompactKernel(kernel.degree, kernel.representation, kernel.segments, kernel.integer_samples,
                           q=kernel.q, name=f"optimized{p.degree}_{p.mode}", metadata={"design": p.config()})
    log.debug("design m=%d mode=%s residual=%.3e", p.degree, p.mode, residual)
    return DesignResult(kernel, system, residual, report)


def design_kernel(p: DesignProblem) -> CompactKernel:
    """Optimised kernel for ``p`` (see :func:`design` for diagnostics)."""
    return design(p).kernel


# -- error functional -------------------------------------------------------

def full_hat(k: CompactKernel, q: int, tol: float) -> SampledFunction:
    """Hat transform over its entire (truncated-inverse) support."""
    g = invert_fir(certify_proper(k.integer_samples), tol)
    return expand_coefficients(g, k.grid_samples(q), q)


def _residual_energy(est: SampledFunction, ref_fn, ref_energy: Optional[float]) -> float:
    """``|ref - est|^2`` integrated over the line.

    ``ref_fn`` is either a SampledFunction or a callable; for a callable the
    energy outside the estimate's window is ``ref_energy`` minus the energy
    inside it.
    """
    q = est.q
    if isinstance(ref_fn, SampledFunction):
        lo, hi = min(est.start, ref_fn.start), max(est.stop, ref_fn.stop)
        idx = np.arange(lo, hi)
        diff = est.samples_at(idx) - ref_fn.samples_at(idx)
        return float(np.sum(np.abs(diff) ** 2) / q)
    ref = ref_fn(est.t)
    inside = float(np.sum(np.abs(ref - est.values) ** 2) / q)
    outside = 0.0
    if ref_energy is not None:
        outside = max(ref_energy - float(np.sum(np.abs(ref) ** 2) / q), 0.0)
    return inside + outside


def error_functional(k: CompactKernel, p: DesignProblem) -> float:
    """L2 error of the interpolating form of ``k`` against the problem's target.

    Filter targets: ``||h - hat(k)||^2``. Signal targets: the reconstruction
    error ``||sum_n x_d[n] hat(k)(t - n) - x||^2`` summed over all signals.
    Integrals use the rectangle rule at spacing ``1 / q``.
    """
    q = p.q
    g = invert_fir(certify_proper(k.integer_samples), p.tol)
    ksamp = k.grid_samples(q)
    target = p.target
    if isinstance(target, FilterTarget):
        hat = expand_coefficients(g, ksamp, q)
        energy = target.h.energy if isinstance(target.h, IdealLowpass) else None
        return _residual_energy(hat, target.h, energy)
    total = 0.0
    for x, x_d in target.signals:
        recon = expand_coefficients(convolve(x_d, g), ksamp, q)
        total += _residual_energy(recon, x, None)
    return total


def stationarity_basis(m: int, q: int, rng: np.random.Generator, terms: int = 8) -> np.ndarray:
    """Random smooth perturbation on ``[0, m + 1]`` vanishing at every integer."""
    u = np.arange((m + 1) * q + 1) / q
    freqs = np.arange(terms)
    phase = np.pi * np.outer(u, freqs) / (m + 1)
    # sin(pi u) supplies the lattice zeros; the envelope mixes even and odd
    # parts about the support centre
    envelope = np.cos(phase) @ rng.standard_normal(terms) + np.sin(phase) @ rng.standard_normal(terms)
    gamma = np.sin(np.pi * u) * envelope
    gamma[::q] = 0.0
    return gamma


def check_stationarity(k: CompactKernel, p: DesignProblem, trials: int = 20, eps: float = STATIONARITY_EPS,
                       seed: int = 0, perturbations: Optional[Sequence[np.ndarray]] = None) -> float:
    """Largest normalised directional derivative of the error at ``k``.

    Each perturbation ``gamma`` lives on the kernel grid ``i / q``,
    ``i = 0..(m + 1) q``, and must vanish on the integer lattice so that
    ``k + eps * gamma`` keeps the same integer samples. The derivative is the
    central difference ``(e(k + eps gamma) - e(k - eps gamma)) / (2 eps)``
    divided by ``||gamma||_2``.
    """
    m, q = p.degree, p.q
    base = k.sampled(q)
    flat = np.concatenate([base.segments[:, :q].ravel(), [0.0]])
    if perturbations is None:
        rng = np.random.default_rng(seed)
        perturbations = [stationarity_basis(m, q, rng) for _ in range(trials)]
    worst = 0.0
    for gamma in perturbations:
        gamma = np.asarray(gamma, dtype=float)
        if gamma.shape != flat.shape:
            raise ValueError(f"perturbation must have {flat.size} grid samples")
        if np.max(np.abs(gamma[::q])) > 1e-12:
            raise InfeasiblePerturbation("perturbation must vanish at integer lattice points")
        norm = math.sqrt(float(np.sum(gamma ** 2)) / q)
        if norm == 0.0:
            continue
        plus = _with_grid(base, flat + eps * gamma)
        minus = _with_grid(base, flat - eps * gamma)
        deriv = (error_functional(plus, p) - error_functional(minus, p)) / (2 * eps)
        worst = max(worst, abs(deriv) / norm)
    return worst


def _with_grid(k: CompactKernel, flat: np.ndarray) -> CompactKernel:
    m, q = k.degree, k.q
    segs = np.stack([flat[n * q:(n + 1) * q + 1] for n in range(m + 1)])
    return CompactKernel(m, "sampled", segs, k.integer_samples, q=q)

