"""Epsilon-insensitive support vector regression via the shared SMO solver.

Property prediction (total phenol, moisture, organic matter) trains one
independent SVR per target on standardized spectra; targets stay in their
native units, so epsilon is expressed in ppm or percent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    ConvergenceWarning,
    DimensionMismatchError,
    EmptyTrainingSetError,
    NonFiniteInputError,
    NumericError,
)
from ..sampling import SampleSet
from .kernels import KernelSpec, gram, gram_self
from .preprocessing import Standardizer, fit_standardizer
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, solve_regressor

DUAL_SUM_TOL = 1e-6


@dataclass(frozen=True)
class SvrModel:
    """Trained regressor: f(x) = dual_coefs . K(SVs, x_std) + bias.

    dual_coefs holds beta_i = alpha_i - alpha_i* for support vectors only;
    each is bounded by c in magnitude and they sum to zero.
    """

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    kernel: KernelSpec
    c: float
    epsilon: float
    standardizer: Standardizer
    support_indices: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    n_iter: int = 0
    converged: bool = True
    seed: int | None = None

    def __post_init__(self):
        if np.any(np.abs(self.dual_coefs) > self.c * (1 + 1e-12)):
            raise NumericError("dual coefficient exceeds the box constraint")
        if self.dual_coefs.size and abs(float(self.dual_coefs.sum())) > DUAL_SUM_TOL:
            raise NumericError("dual coefficients do not sum to zero")

    @property
    def bands(self) -> int:
        return int(self.standardizer.mean.size)


def smo_train_svr(
    x: np.ndarray,
    t: np.ndarray,
    kernel: KernelSpec,
    c: float,
    epsilon: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    warn: bool = True,
    seed: int | None = None,
) -> SvrModel:
    """Train an epsilon-SVR; fits its own feature standardizer on x."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    t = np.asarray(t, dtype=np.float64)
    if x.shape[0] < 2:
        raise EmptyTrainingSetError(f"need >= 2 samples, got {x.shape[0]}")
    if x.shape[0] != t.shape[0]:
        raise DimensionMismatchError(t.shape[0], x.shape[0])
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
        raise NonFiniteInputError("training data contains non-finite values")
    if epsilon < 0:
        raise NumericError(f"epsilon must be >= 0, got {epsilon}")

    standardizer = fit_standardizer(x)
    xs = standardizer.transform(x)
    K = gram_self(kernel, xs)
    beta, bias, n_iter, converged = solve_regressor(K, t, c, epsilon, tol, max_iter)
    if not converged and warn:
        warnings.warn(
            f"SMO stopped after {n_iter} updates without meeting tol={tol}",
            ConvergenceWarning,
            stacklevel=2,
        )
    sv = beta != 0.0
    return SvrModel(
        support_vectors=xs[sv],
        dual_coefs=beta[sv],
        bias=bias,
        kernel=kernel,
        c=c,
        epsilon=epsilon,
        standardizer=standardizer,
        support_indices=np.flatnonzero(sv).astype(np.int64),
        n_iter=n_iter,
        converged=converged,
        seed=seed,
    )


def train_svr(
    train: SampleSet,
    target_key: str,
    kernel: KernelSpec,
    c: float,
    epsilon: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int | None = None,
) -> SvrModel:
    """Train on one chemistry target of a sample set."""
    return smo_train_svr(
        train.spectra_matrix(),
        train.target_values(target_key),
        kernel,
        c,
        epsilon,
        tol,
        max_iter,
        seed=seed,
    )


def predict_svr(model: SvrModel, x: np.ndarray):
    """Predict targets for a spectrum (1-D) or a batch (2-D)."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if x.shape[-1] != model.bands:
        raise DimensionMismatchError(x.shape[-1], model.bands)
    xs = model.standardizer.transform(np.atleast_2d(x))
    if model.support_vectors.shape[0] == 0:
        out = np.full(xs.shape[0], model.bias)
    else:
        out = gram(model.kernel, xs, model.support_vectors) @ model.dual_coefs + model.bias
    return float(out[0]) if single else out
