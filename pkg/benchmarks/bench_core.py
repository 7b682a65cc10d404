"""Time the compiled polyphase core against the numpy fallback.

    python benchmarks/bench_core.py [--size 256] [--repeat 5]
"""
import argparse
import time

import numpy as np

from optspline import _backend
from optspline.designer import DesignProblem, FilterTarget, IdealLowpass, default_rho_d, design_kernel
from optspline.resample import baseline_kernels, enlarge_image


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--factor", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    img = np.random.default_rng(0).random((args.size, args.size))
    kernels = dict(baseline_kernels())
    kernels["opt_sinc"] = design_kernel(DesignProblem(3, default_rho_d(3), FilterTarget(IdealLowpass())))
    backends = ["python"] + (["cython"] if _backend._compiled is not None else [])
    print(f"image {args.size}x{args.size}, factor {args.factor}, best of {args.repeat}")
    print(f"{'kernel':10s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup")
    for name, k in kernels.items():
        outs, t = {}, {}
        for b in backends:
            t[b] = best_of(lambda: outs.__setitem__(b, enlarge_image(img, k, args.factor, backend=b)), args.repeat)
        if len(backends) == 2:
            diff = np.max(np.abs(outs["python"].pixels - outs["cython"].pixels))
            assert diff < 1e-12, diff
            extra = f"{t['python'] / t['cython']:9.1f}x"
        else:
            extra = "   (no compiled core)"
        print(f"{name:10s} " + " ".join(f"{t[b] * 1e3:8.1f}ms" for b in backends) + extra)


if __name__ == "__main__":
    main()
