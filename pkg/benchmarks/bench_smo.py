#!/usr/bin/env python3
"""Benchmark the SMO solver: numba kernel vs pure-numpy fallback.

Both backends are imported directly so one process can time them side by
side; PEATCUBE_DISABLE_NUMBA is only how the library itself picks a backend
at import time. Problems mimic the pipeline's workloads: pairwise
classification machines and epsilon-regression on standardized spectra.
"""

import argparse
import time

import numpy as np

from peatcube.svm import KernelSpec, gram_self
from peatcube.svm import _solver_numpy

try:
    from peatcube.svm import _solver_numba

    HAS_NUMBA = True
except ImportError:
    _solver_numba = None
    HAS_NUMBA = False


def classification_problem(n, bands, seed):
    rng = np.random.default_rng(seed)
    half = n // 2
    x = np.vstack(
        [rng.normal(-0.6, 1.0, (half, bands)), rng.normal(0.6, 1.0, (n - half, bands))]
    )
    y = np.concatenate([-np.ones(half), np.ones(n - half)])
    K = gram_self(KernelSpec("rbf", 1.0 / bands), x)
    cmap = np.arange(n, dtype=np.int64)
    p = np.full(n, -1.0)
    return K, cmap, y, p


def regression_problem(n, bands, seed, epsilon=0.1):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, bands))
    t = x @ rng.normal(size=bands) + 0.05 * rng.standard_normal(n)
    K = gram_self(KernelSpec("rbf", 1.0 / bands), x)
    idx = np.arange(n, dtype=np.int64)
    cmap = np.concatenate([idx, idx])
    y = np.concatenate([np.ones(n), -np.ones(n)])
    p = np.concatenate([epsilon - t, epsilon + t])
    return K, cmap, y, p


def time_solver(solve, args, repeats):
    solve(*args)  # warm-up (JIT compile / cache touch)
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        beta, bias, n_iter, converged = solve(*args)
        best = min(best, time.perf_counter() - start)
    return best, n_iter, converged


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[50, 150, 400, 800])
    parser.add_argument("--bands", type=int, default=60)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--c", type=float, default=10.0)
    cli = parser.parse_args()

    if not HAS_NUMBA:
        print("numba unavailable: reporting the numpy fallback only\n")

    header = f"{'problem':<22} {'n':>5} {'iters':>8} {'numpy':>12} {'numba':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    speedups = []
    for kind, build in (("classification", classification_problem),
                        ("regression", regression_problem)):
        for n in cli.sizes:
            args = (*build(n, cli.bands, seed=n), cli.c, 1e-3, 5_000_000)
            t_np, iters, conv = time_solver(_solver_numpy.solve, args, cli.repeats)
            row = f"{kind:<22} {n:>5} {iters:>8} {t_np * 1e3:>10.2f}ms"
            if HAS_NUMBA:
                t_nb, iters_nb, _ = time_solver(_solver_numba.solve, args, cli.repeats)
                assert iters_nb == iters, "backends disagree on the iteration path"
                speedups.append(t_np / t_nb)
                row += f" {t_nb * 1e3:>10.2f}ms {t_np / t_nb:>8.1f}x"
            if not conv:
                row += "  (hit cap)"
            print(row)

    if speedups:
        print("-" * len(header))
        print(f"geometric-mean speedup: {np.exp(np.mean(np.log(speedups))):.1f}x")


if __name__ == "__main__":
    main()
