"""Command-line interface.

Subcommands: ``design``, ``interp``, ``enlarge``, ``compare`` and
``kernel-dump``. Each prints its resolved configuration (as JSON, on
stderr) before doing any work.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O error,
5 empty image corpus.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from ._backend import BACKEND
from .designer import (DesignProblem, FilterTarget, IdealLowpass, SignalTarget, default_rho_d, design)
from .errors import ImageFormatError, NumericalError, OptsplineError
from .kernels import (DEFAULT_HALFWIDTH, DEFAULT_Q, DEFAULT_TOL, CompactKernel, SampledFunction,
                      bspline_kernel, cardinal_spline, hat_transform)
from .metrics import SCENARIOS, METHODS, ExperimentConfig, experiment_report, hat_snr, serial_db, snr
from .resample import ImageBuffer, baseline_kernels, enlarge_image, interpolate_1d
from .seqalg import DiscreteSequence

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO, EXIT_EMPTY = 0, 2, 3, 4, 5
CORPUS_ENV = "OPTSPLINE_CORPUS"

log = logging.getLogger("optspline")


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _announce(cmd: str, cfg: dict):
    print(f"optspline {cmd} " + json.dumps(cfg, sort_keys=True), file=sys.stderr)


def _write_text(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def parse_rho_d(text: str | None, degree: int) -> DiscreteSequence:
    """Integer samples from an inline list (``a,b,c``, placed at ``1..``) or a file."""
    if not text:
        return default_rho_d(degree)
    if os.path.exists(text):
        with open(text) as fh:
            body = fh.read()
        if body.lstrip().startswith(("{", "offset")):
            return DiscreteSequence.from_text(body)
        text = body
    try:
        vals = [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"cannot parse --rho-d {text!r}") from None
    if not vals:
        raise UsageError("--rho-d is empty")
    return DiscreteSequence(1, vals)


def load_kernel(source: str, degree: int = 3, q: int = DEFAULT_Q, tol: float = DEFAULT_TOL) -> CompactKernel:
    """Kernel from a name (``bspline<m>``, ``bilinear``, ``bicubic``, ``opt_sinc``) or a JSON file."""
    base = baseline_kernels()
    if source in base:
        return base[source]
    if source == "keys":
        return base["bicubic"]
    if source.startswith("bspline") and source[7:].isdigit():
        return bspline_kernel(int(source[7:]))
    if source == "opt_sinc":
        return design(DesignProblem(degree, default_rho_d(degree), FilterTarget(IdealLowpass()), q=q, tol=tol)).kernel
    with open(source) as fh:
        return CompactKernel.from_dict(json.load(fh))


def _read_function(path: str) -> SampledFunction:
    with open(path) as fh:
        return SampledFunction.from_csv(fh.read())


# -- commands -----------------------------------------------------------------

def cmd_design(args) -> int:
    if args.mode in ("filter", "signal") and not args.target:
        raise UsageError(f"--mode {args.mode} requires --target")
    rho = parse_rho_d(args.rho_d, args.degree)
    cfg = {"command": "design", "degree": args.degree, "rho_d": rho.to_dict(), "mode": args.mode,
           "target": args.target, "Q": args.q, "tol": args.tol, "halfwidth": args.halfwidth,
           "backend": BACKEND, "version": __version__}
    _announce("design", cfg)
    if args.mode == "sinc":
        target = FilterTarget(IdealLowpass())
    else:
        f = _read_function(args.target)
        target = FilterTarget(f) if args.mode == "filter" else SignalTarget.from_signal(f)
    problem = DesignProblem(args.degree, rho, target, q=args.q, tol=args.tol, halfwidth=args.halfwidth)
    result = design(problem, stationarity_trials=args.stationarity_trials)
    report = dict(result.report)
    if args.mode == "sinc":
        report["hat_snr_db"] = serial_db(hat_snr(result.kernel, args.halfwidth, args.q, args.tol))
        report["hat_snr_db_window_only"] = serial_db(
            hat_snr(result.kernel, args.halfwidth, args.q, args.tol, full_line=False))
        report["hat_snr_db_by_halfwidth"] = {
            str(hw): serial_db(hat_snr(result.kernel, hw, args.q, args.tol)) for hw in (16, 32, 64)}
    elif args.mode == "filter":
        h = problem.target.h
        est = hat_transform(result.kernel, args.tol, args.halfwidth, args.q)
        ref = SampledFunction(est.start, est.q, h.samples_at(np.arange(est.start, est.stop)))
        report["hat_snr_db"] = serial_db(snr(ref, est, h.energy()))
    meta = dict(result.kernel.metadata)
    meta["defaults"] = {"Q": DEFAULT_Q, "tol": DEFAULT_TOL, "halfwidth": DEFAULT_HALFWIDTH}
    kernel = CompactKernel(result.kernel.degree, result.kernel.representation, result.kernel.segments,
                           result.kernel.integer_samples, q=result.kernel.q, name=result.kernel.name,
                           metadata=meta)
    _write_text(args.out, _dump(kernel.to_dict()))
    if args.report:
        _write_text(args.report, _dump(report))
    else:
        print(_dump(report), end="", file=sys.stderr)
    return EXIT_OK


def cmd_interp(args) -> int:
    cfg = {"command": "interp", "kernel": args.kernel, "input": args.input, "Q": args.q, "tol": args.tol,
           "degree": args.degree}
    _announce("interp", cfg)
    k = load_kernel(args.kernel, args.degree, tol=args.tol)
    with open(args.input) as fh:
        x_d = DiscreteSequence.from_text(fh.read())
    out = interpolate_1d(x_d, k, args.q, args.tol)
    _write_text(args.out, out.to_csv())
    return EXIT_OK


def cmd_enlarge(args) -> int:
    cfg = {"command": "enlarge", "kernel": args.kernel, "factor": args.factor, "tol": args.tol,
           "input": args.input, "output": args.output, "order": args.order, "boundary": "mirror",
           "backend": BACKEND}
    _announce("enlarge", cfg)
    if args.factor < 2:
        raise UsageError("--factor must be at least 2")
    k = load_kernel(args.kernel, args.degree, tol=args.tol)
    img = ImageBuffer.read(args.input)
    out = enlarge_image(img, k, args.factor, args.tol, order=args.order)
    out.write(args.output)
    return EXIT_OK


def cmd_compare(args) -> int:
    corpus = args.corpus or os.environ.get(CORPUS_ENV)
    if not corpus:
        raise UsageError(f"no corpus given (use --corpus or set {CORPUS_ENV})")
    scenarios = tuple(args.scenario) if args.scenario else SCENARIOS
    methods = tuple(args.methods.split(",")) if args.methods else METHODS
    bad = [m for m in methods if m not in METHODS]
    if bad or any(s not in SCENARIOS for s in scenarios):
        raise UsageError(f"unknown method or scenario: {bad or scenarios}")
    cfg = ExperimentConfig(corpus=corpus, factor=args.factor, scenarios=scenarios, methods=methods,
                           degree=args.degree, tol=args.tol)
    _announce("compare", cfg.to_dict())
    report = experiment_report(cfg)
    _write_text(args.csv, report.to_csv())
    if args.csv_8bit:
        _write_text(args.csv_8bit, report.to_csv(quantized=True))
    text = "".join(report.to_text(s) + "\n" + report.to_text(s, quantized=True) + "\n" for s in scenarios)
    if args.table:
        _write_text(args.table, text)
    else:
        sys.stderr.write(text)
    for name, msg in report.failures:
        print(f"failed: {name}: {msg}", file=sys.stderr)
    if report.status == "empty":
        print(f"no images found in {corpus}", file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


def cmd_kernel_dump(args) -> int:
    cfg = {"command": "kernel-dump", "which": args.which, "degree": args.degree, "kernel": args.kernel,
           "Q": args.q, "tol": args.tol, "halfwidth": args.halfwidth}
    _announce("kernel-dump", cfg)
    if args.which == "bspline":
        k = bspline_kernel(args.degree)
        f = SampledFunction.from_function(k, 0, args.degree + 1, args.q)
    elif args.which == "cardinal":
        f = cardinal_spline(args.degree, args.tol, args.halfwidth, args.q)
    else:
        k = load_kernel(args.kernel or "opt_sinc", args.degree, args.q, args.tol)
        if args.which == "optimized":
            f = SampledFunction.from_function(k, 0, k.degree + 1, args.q)
        else:
            f = hat_transform(k, args.tol, args.halfwidth, args.q)
    _write_text(args.out, f.to_csv())
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="optspline", description="Optimised compact-support interpolation kernels.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, q=True, halfwidth=False):
        sp.add_argument("--degree", type=int, default=3)
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
        if q:
            sp.add_argument("--q", type=int, default=DEFAULT_Q)
        if halfwidth:
            sp.add_argument("--halfwidth", type=int, default=DEFAULT_HALFWIDTH)

    d = sub.add_parser("design", help="design an optimised kernel")
    common(d, halfwidth=True)
    d.add_argument("--rho-d", dest="rho_d", help="integer samples at 1..m: 'a,b,c' or a file")
    d.add_argument("--mode", choices=("sinc", "filter", "signal"), default="sinc")
    d.add_argument("--target", help="CSV (t,value) target filter or reference signal")
    d.add_argument("--stationarity-trials", type=int, default=20)
    d.add_argument("--out", help="kernel JSON (default stdout)")
    d.add_argument("--report", help="design report JSON (default stderr)")
    d.set_defaults(func=cmd_design)

    i = sub.add_parser("interp", help="interpolate a 1-D sequence")
    common(i)
    i.add_argument("--kernel", default="bspline3")
    i.add_argument("--out")
    i.add_argument("input", help="sequence file ('offset k' + values, or JSON)")
    i.set_defaults(func=cmd_interp)

    e = sub.add_parser("enlarge", help="enlarge an image by an integer factor")
    common(e, q=False)
    e.add_argument("--factor", type=int, default=2)
    e.add_argument("--kernel", default="opt_sinc")
    e.add_argument("--order", choices=("rows", "cols"), default="rows")
    e.add_argument("input")
    e.add_argument("output")
    e.set_defaults(func=cmd_enlarge)

    c = sub.add_parser("compare", help="run the enlargement experiment over an image corpus")
    common(c, q=False)
    c.add_argument("--corpus", help=f"image directory (default ${CORPUS_ENV})")
    c.add_argument("--scenario", type=int, action="append", choices=SCENARIOS)
    c.add_argument("--methods", help="comma-separated subset of " + ",".join(METHODS))
    c.add_argument("--factor", type=int, default=2)
    c.add_argument("--csv", help="PSNR CSV (default stdout)")
    c.add_argument("--csv-8bit", dest="csv_8bit", help="PSNR CSV on 8-bit quantised images")
    c.add_argument("--table", help="aligned text tables (default stderr)")
    c.set_defaults(func=cmd_compare)

    k = sub.add_parser("kernel-dump", help="write kernel, hat or cardinal curves as CSV")
    common(k, halfwidth=True)
    k.add_argument("--which", choices=("bspline", "cardinal", "optimized", "hat"), default="cardinal")
    k.add_argument("--kernel", help="kernel name or JSON for --which optimized/hat (default opt_sinc)")
    k.add_argument("--out")
    k.set_defaults(func=cmd_kernel_dump)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"optspline: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"optspline: numerical error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, UnicodeDecodeError, ImageFormatError) as exc:
        print(f"optspline: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OptsplineError, ValueError) as exc:
        print(f"optspline: error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL if isinstance(exc, OptsplineError) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
