"""Binary SVC via SMO and one-vs-one multiclass voting.

Grading treats each peat scan as its own category, so a k-class problem
trains k*(k-1)/2 pairwise machines on standardized spectra and predicts by
majority vote. Vote ties break by the larger summed |decision value| over the
tied classes, then by class order.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    ConvergenceWarning,
    DimensionMismatchError,
    NonFiniteInputError,
    NumericError,
    SingleClassInputError,
)
from ..sampling import SampleSet
from .kernels import KernelSpec, gram, gram_self
from .preprocessing import Standardizer, fit_standardizer
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, solve_classifier

DUAL_SUM_TOL = 1e-6


@dataclass(frozen=True)
class BinarySvc:
    """One trained binary machine: f(x) = dual_coefs . K(SVs, x) + bias.

    dual_coefs holds alpha_i * y_i for the support vectors only, so every
    entry is bounded by the box constraint and they sum to zero.
    """

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    kernel: KernelSpec
    c: float
    support_indices: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    n_iter: int = 0
    converged: bool = True

    def __post_init__(self):
        if np.any(np.abs(self.dual_coefs) > self.c * (1 + 1e-12)):
            raise NumericError("dual coefficient exceeds the box constraint")
        if self.dual_coefs.size and abs(float(self.dual_coefs.sum())) > DUAL_SUM_TOL:
            raise NumericError("dual coefficients do not sum to zero")

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.support_vectors.shape[1]:
            raise DimensionMismatchError(x.shape[1], self.support_vectors.shape[1])
        return gram(self.kernel, x, self.support_vectors) @ self.dual_coefs + self.bias


def smo_train_binary(
    x: np.ndarray,
    y: np.ndarray,
    kernel: KernelSpec,
    c: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    warn: bool = True,
) -> BinarySvc:
    """Train one binary machine on +/-1 labels.

    Hitting the iteration cap is not an error: the best-so-far machine is
    returned with converged=False and a ConvergenceWarning.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInputError("training matrix contains non-finite values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise SingleClassInputError("labels must be exactly +1 or -1")
    if np.all(y > 0) or np.all(y < 0):
        raise SingleClassInputError("both labels must be present")

    K = gram_self(kernel, x)
    alpha, bias, n_iter, converged = solve_classifier(K, y, c, tol, max_iter)
    if not converged and warn:
        warnings.warn(
            f"SMO stopped after {n_iter} updates without meeting tol={tol}",
            ConvergenceWarning,
            stacklevel=2,
        )
    sv = alpha > 0.0
    return BinarySvc(
        support_vectors=x[sv],
        dual_coefs=(alpha * y)[sv],
        bias=bias,
        kernel=kernel,
        c=c,
        support_indices=np.flatnonzero(sv).astype(np.int64),
        n_iter=n_iter,
        converged=converged,
    )


@dataclass(frozen=True)
class PairMachine:
    """A pairwise machine inside an SvcModel, indexing the shared SV pool."""

    class_a: str  # positive side
    class_b: str  # negative side
    pool_slots: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    n_iter: int = 0
    converged: bool = True


@dataclass(frozen=True)
class SvcModel:
    """One-vs-one multiclass SVC over standardized spectra."""

    classes: list[str]
    machines: list[PairMachine]
    standardizer: Standardizer
    kernel: KernelSpec
    c: float
    sv_pool: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        k = len(self.classes)
        if len(self.machines) != k * (k - 1) // 2:
            raise NumericError(
                f"{len(self.machines)} machines for {k} classes; expected {k * (k - 1) // 2}"
            )

    @property
    def bands(self) -> int:
        return int(self.standardizer.mean.size)

    @property
    def converged(self) -> bool:
        return all(m.converged for m in self.machines)

    def binary_machine(self, index: int) -> BinarySvc:
        """Materialize machine `index` as a standalone BinarySvc."""
        m = self.machines[index]
        return BinarySvc(
            support_vectors=self.sv_pool[m.pool_slots],
            dual_coefs=m.dual_coefs,
            bias=m.bias,
            kernel=self.kernel,
            c=self.c,
            support_indices=m.pool_slots,
            n_iter=m.n_iter,
            converged=m.converged,
        )


def class_pairs(classes: list[str]) -> list[tuple[int, int]]:
    k = len(classes)
    return [(a, b) for a in range(k) for b in range(a + 1, k)]


def train_svc(
    train: SampleSet,
    kernel: KernelSpec,
    c: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    jobs: int = 1,
    seed: int | None = None,
) -> SvcModel:
    """Fit the standardizer on the full training set, then one machine per pair.

    Pairwise machines are independent; with jobs > 1 they train on a thread
    pool and land in a preallocated slot per pair, so the result does not
    depend on scheduling order.
    """
    labels = train.labels()
    if any(lb is None for lb in labels):
        raise SingleClassInputError("classification requires labeled samples")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise SingleClassInputError(f"need >= 2 classes, got {len(classes)}")

    standardizer = fit_standardizer(train.spectra_matrix())
    xs = standardizer.transform(train.spectra_matrix())
    label_arr = np.array(labels)

    class_rows = {cls: np.flatnonzero(label_arr == cls) for cls in classes}
    pairs = class_pairs(classes)
    results: list = [None] * len(pairs)

    def _fit_pair(pair_idx: int) -> None:
        a, b = pairs[pair_idx]
        rows_a = class_rows[classes[a]]
        rows_b = class_rows[classes[b]]
        rows = np.concatenate([rows_a, rows_b])
        y = np.concatenate([np.ones(rows_a.size), -np.ones(rows_b.size)])
        svc = smo_train_binary(xs[rows], y, kernel, c, tol, max_iter, warn=False)
        results[pair_idx] = (rows[svc.support_indices], svc)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_fit_pair, range(len(pairs))))
    else:
        for idx in range(len(pairs)):
            _fit_pair(idx)

    # dedupe support vectors into one pool shared by all machines
    all_idx = np.concatenate([global_idx for global_idx, _ in results])
    pool_indices = np.unique(all_idx)
    slot_of = {int(g): s for s, g in enumerate(pool_indices)}

    machines = []
    for (a, b), (global_idx, svc) in zip(pairs, results):
        slots = np.array([slot_of[int(g)] for g in global_idx], dtype=np.int64)
        machines.append(
            PairMachine(
                class_a=classes[a],
                class_b=classes[b],
                pool_slots=slots,
                dual_coefs=svc.dual_coefs,
                bias=svc.bias,
                n_iter=svc.n_iter,
                converged=svc.converged,
            )
        )
    n_failed = sum(1 for m in machines if not m.converged)
    if n_failed:
        warnings.warn(
            f"{n_failed}/{len(machines)} pairwise machines hit the iteration cap",
            ConvergenceWarning,
            stacklevel=2,
        )
    return SvcModel(
        classes=classes,
        machines=machines,
        standardizer=standardizer,
        kernel=kernel,
        c=c,
        sv_pool=xs[pool_indices],
        seed=seed,
    )


def decision_values(model: SvcModel, x: np.ndarray) -> np.ndarray:
    """Decision value of every pairwise machine, shape (n_points, n_machines)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    xs = model.standardizer.transform(x)
    K = gram(model.kernel, xs, model.sv_pool)
    out = np.empty((xs.shape[0], len(model.machines)))
    for mi, m in enumerate(model.machines):
        out[:, mi] = K[:, m.pool_slots] @ m.dual_coefs + m.bias
    return out


def predict_svc(model: SvcModel, x: np.ndarray):
    """Majority vote over the pairwise machines.

    Accepts a single spectrum (1-D) or a batch (2-D); returns a class id or
    an array of them.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if x.shape[-1] != model.bands:
        raise DimensionMismatchError(x.shape[-1], model.bands)
    fvals = decision_values(model, x)
    n = fvals.shape[0]
    k = len(model.classes)
    votes = np.zeros((n, k), dtype=np.int64)
    conf = np.zeros((n, k), dtype=np.float64)
    class_index = {cls: i for i, cls in enumerate(model.classes)}
    for mi, m in enumerate(model.machines):
        f = fvals[:, mi]
        a = class_index[m.class_a]
        b = class_index[m.class_b]
        pos = f > 0.0
        votes[pos, a] += 1
        votes[~pos, b] += 1
        conf[pos, a] += f[pos]
        conf[~pos, b] += -f[~pos]

    top = votes == votes.max(axis=1, keepdims=True)
    conf_masked = np.where(top, conf, -np.inf)
    best = conf_masked == conf_masked.max(axis=1, keepdims=True)
    picks = best.argmax(axis=1)  # first True = smallest class index
    out = np.array([model.classes[i] for i in picks])
    return out[0] if single else out
