"""Pure-numpy SMO solver (fallback backend).

Solves min 1/2 b'Qb + p'b subject to y'b = 0 and 0 <= b <= c, where
Q[s, t] = y[s] * y[t] * K[cmap[s], cmap[t]]. Classification passes the Gram
matrix directly (cmap = identity, p = -1); epsilon-regression doubles the
variables and maps both halves onto the same Gram row.

The working set is the maximal-KKT-violation pair; iteration stops when the
largest lower bound on the bias exceeds the smallest upper bound by at most
tol. Arithmetic is ordered identically to the numba backend so both produce
the same model bit for bit.
"""

from __future__ import annotations

import numpy as np

TAU = 1e-12  # curvature floor for non-positive-definite pairs


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
    m = y.shape[0]
    beta = np.zeros(m, dtype=np.float64)
    grad = p.copy()
    pos = y > 0.0
    it = 0
    converged = False

    while True:
        neg_yg = -(y * grad)
        up = (pos & (beta < c)) | (~pos & (beta > 0.0))
        low = (pos & (beta > 0.0)) | (~pos & (beta < c))
        has_up = bool(up.any())
        has_low = bool(low.any())
        if not has_up or not has_low:
            converged = True
            break
        i = int(np.argmax(np.where(up, neg_yg, -np.inf)))
        j = int(np.argmin(np.where(low, neg_yg, np.inf)))
        if neg_yg[i] - neg_yg[j] <= tol:
            converged = True
            break
        if it >= max_iter:
            break

        ci = int(cmap[i])
        cj = int(cmap[j])
        eta = K[ci, ci] + K[cj, cj] - 2.0 * K[ci, cj]
        if eta <= 0.0:
            eta = TAU
        dj = y[j] * ((y[i] * grad[i]) - (y[j] * grad[j])) / eta

        # joint feasibility box for the step, from both variables' bounds
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
        ki = K[ci][cmap]
        kj = K[cj][cmap]
        grad += di * (y[i] * (y * ki)) + dj * (y[j] * (y * kj))
        it += 1

    # bias bracket from the final gradient
    neg_yg = -(y * grad)
    up = (pos & (beta < c)) | (~pos & (beta > 0.0))
    low = (pos & (beta > 0.0)) | (~pos & (beta < c))
    has_up = bool(up.any())
    has_low = bool(low.any())
    if has_up and has_low:
        bias = 0.5 * (np.max(neg_yg[up]) + np.min(neg_yg[low]))
    elif has_up:
        bias = float(np.max(neg_yg[up]))
    elif has_low:
        bias = float(np.min(neg_yg[low]))
    else:
        bias = 0.0
    return beta, float(bias), it, converged
