"""Backend dispatch and problem builders for the SMO solver.

The backend is chosen once at import time from PEATCUBE_DISABLE_NUMBA and
numba availability; see peatcube.accel. Both backends share one contract:
solve(K, cmap, y, p, c, tol, max_iter) -> (beta, bias, n_updates, converged).
"""

from __future__ import annotations

import numpy as np

from .. import accel

BACKEND = accel.active_backend()

if BACKEND == "numba":
    from . import _solver_numba as _impl
else:
    from . import _solver_numpy as _impl

#: iteration cap used when callers do not pass one; first-order pair
#: selection can zigzag on flat linear-kernel problems, and one update is
#: only O(n), so the cap is generous
DEFAULT_MAX_ITER = 2_000_000
DEFAULT_TOL = 1e-3


def solve_classifier(
    K: np.ndarray,
    y: np.ndarray,
    c: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[np.ndarray, float, int, bool]:
    """Solve the soft-margin dual on a precomputed Gram matrix.

    y must be +/-1. Returns (alpha, bias, n_updates, converged); the decision
    function is sum_i alpha_i y_i K(x_i, x) + bias.
    """
    n = y.shape[0]
    cmap = np.arange(n, dtype=np.int64)
    p = np.full(n, -1.0)
    return _impl.solve(K, cmap, np.asarray(y, dtype=np.float64), p, c, tol, max_iter)


def solve_regressor(
    K: np.ndarray,
    t: np.ndarray,
    c: float,
    epsilon: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[np.ndarray, float, int, bool]:
    """Solve the epsilon-insensitive regression dual on a precomputed Gram.

    Internally doubles the variables (alpha, alpha*); returns the collapsed
    coefficients beta = alpha - alpha*, so the prediction is
    sum_i beta_i K(x_i, x) + bias. Returns (beta, bias, n_updates, converged).
    """
    t = np.asarray(t, dtype=np.float64)
    n = t.shape[0]
    idx = np.arange(n, dtype=np.int64)
    cmap = np.concatenate([idx, idx])
    y = np.concatenate([np.ones(n), -np.ones(n)])
    p = np.concatenate([epsilon - t, epsilon + t])
    beta2, bias, n_iter, converged = _impl.solve(K, cmap, y, p, c, tol, max_iter)
    beta = beta2[:n] - beta2[n:]
    return beta, bias, n_iter, converged
