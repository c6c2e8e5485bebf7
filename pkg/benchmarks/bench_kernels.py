"""Time the compiled kernels against the numpy fallback.

Run ``python3 benchmarks/bench_kernels.py [--trials N] [--repeat K]``. Each
kernel is timed on identical random inputs and the outputs are compared.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qmfopt import _kernels_py

try:
    from qmfopt import _kernels
except ImportError:  # extension not built
    _kernels = None


def _cases(n, rng):
    h = rng.exponential(3.0, n)
    g1 = rng.exponential(2.0, n)
    g2 = rng.exponential(1.0, n)
    d = rng.exponential(2.0, n)
    diam = rng.exponential(1.0, (n, 4))
    return {
        "fd_csir_delta_asym": (h, 1.5, 1.0, 0.3, 1e-6, 1e8, 400),
        "hd_global_search": (h, g1, g2, 128),
        "hd_csir_success": (h / (1.0 + d), np.log2(1.0 + 1.0 / d), rng.uniform(0.05, 0.95, n),
                            2.0, 0.5, 0.7),
        "diamond_cut_min": (diam, rng.exponential(1.0, (n, 4)), np.full((n, 4), 0.5),
                            rng.integers(0, 16, n)),
    }


def _best_time(fn, args, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _max_rel(a, b):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    fin = np.isfinite(a) & np.isfinite(b)
    if not fin.any():
        return 0.0
    return float(np.max(np.abs(a[fin] - b[fin]) / np.maximum(np.abs(b[fin]), 1e-300)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    cases = _cases(args.trials, np.random.default_rng(7))
    print(f"{'kernel':<22}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max rel diff':>15}")
    for name, call_args in cases.items():
        tp, outp = _best_time(getattr(_kernels_py, name), call_args, args.repeat)
        if _kernels is None:
            print(f"{name:<22}{tp:>12.4f}{'n/a':>12}")
            continue
        tc, outc = _best_time(getattr(_kernels, name), call_args, args.repeat)
        print(f"{name:<22}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.2f}{_max_rel(outc, outp):>15.2e}")


if __name__ == "__main__":
    main()
