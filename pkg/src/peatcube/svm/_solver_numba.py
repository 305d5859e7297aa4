"""Numba-compiled SMO solver (default backend).

Same algorithm and arithmetic order as _solver_numpy.solve; see that module
for the problem statement. The kernel releases the GIL so pairwise machines
and grid cells can train on a thread pool.
"""

from __future__ import annotations

import numpy as np
from numba import njit

TAU = 1e-12


@njit(cache=True, nogil=True)
def _solve_kernel(K, cmap, y, p, c, tol, max_iter):  # pragma: no cover - compiled
    m = y.shape[0]
    beta = np.zeros(m, dtype=np.float64)
    grad = p.copy()
    it = 0
    converged = False

    while True:
        i = -1
        j = -1
        best_up = -np.inf
        best_low = np.inf
        for t in range(m):
            v = -(y[t] * grad[t])
            if (y[t] > 0.0 and beta[t] < c) or (y[t] < 0.0 and beta[t] > 0.0):
                if v > best_up:
                    best_up = v
                    i = t
            if (y[t] > 0.0 and beta[t] > 0.0) or (y[t] < 0.0 and beta[t] < c):
                if v < best_low:
                    best_low = v
                    j = t
        if i < 0 or j < 0:
            converged = True
            break
        if best_up - best_low <= tol:
            converged = True
            break
        if it >= max_iter:
            break

        ci = cmap[i]
        cj = cmap[j]
        eta = K[ci, ci] + K[cj, cj] - 2.0 * K[ci, cj]
        if eta <= 0.0:
            eta = TAU
        dj = y[j] * ((y[i] * grad[i]) - (y[j] * grad[j])) / eta

        if y[i] == y[j]:
            lo = beta[i] - c
            hi = beta[i]
        else:
            lo = -beta[i]
            hi = c - beta[i]
        if -beta[j] > lo:
            lo = -beta[j]
        if c - beta[j] < hi:
            hi = c - beta[j]
        if dj < lo:
            dj = lo
        elif dj > hi:
            dj = hi
        di = -(y[i] * y[j]) * dj

        beta[i] += di
        beta[j] += dj
        yi = y[i]
        yj = y[j]
        for t in range(m):
            grad[t] += di * (yi * (y[t] * K[ci, cmap[t]])) + dj * (
                yj * (y[t] * K[cj, cmap[t]])
            )
        it += 1

    best_up = -np.inf
    best_low = np.inf
    has_up = False
    has_low = False
    for t in range(m):
        v = -(y[t] * grad[t])
        if (y[t] > 0.0 and beta[t] < c) or (y[t] < 0.0 and beta[t] > 0.0):
            has_up = True
            if v > best_up:
                best_up = v
        if (y[t] > 0.0 and beta[t] > 0.0) or (y[t] < 0.0 and beta[t] < c):
            has_low = True
            if v < best_low:
                best_low = v
    if has_up and has_low:
        bias = 0.5 * (best_up + best_low)
    elif has_up:
        bias = best_up
    elif has_low:
        bias = best_low
    else:
        bias = 0.0
    return beta, bias, it, converged


def solve(
    K: np.ndarray,
    cmap: np.ndarray,
    y: np.ndarray,
    p: np.ndarray,
    c: float,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, float, int, bool]:
    """Returns (beta, bias, n_updates, converged)."""
    beta, bias, it, converged = _solve_kernel(
        np.ascontiguousarray(K, dtype=np.float64),
        np.ascontiguousarray(cmap, dtype=np.int64),
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(p, dtype=np.float64),
        float(c),
        float(tol),
        int(max_iter),
    )
    return beta, float(bias), int(it), bool(converged)
