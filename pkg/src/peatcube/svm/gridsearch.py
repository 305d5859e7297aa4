"""Exhaustive k-fold cross-validated hyperparameter search.

Scores every point of the Cartesian grid; classification uses mean fold
overall accuracy, regression mean fold negative RMSE. Ties resolve to the
smallest c, then gamma, then epsilon, so results are reproducible.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, FoldsExceedClassCountError, SingleClassInputError
from ..sampling import SampleSet
from .classify import predict_svc, train_svc
from .kernels import RBF, KernelSpec
from .regress import predict_svr, train_svr
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL

CLASSIFY = "classify"
REGRESS = "regress"

#: classic coarse log-spaced defaults
DEFAULT_C_VALUES = [2.0**k for k in range(-5, 16, 2)]
DEFAULT_GAMMA_VALUES = [2.0**k for k in range(-15, 4, 2)]
DEFAULT_EPSILON_VALUES = [0.01, 0.1, 1.0]


@dataclass(frozen=True)
class GridSpec:
    c_values: list[float]
    gamma_values: list[float]
    epsilon_values: list[float] = field(default_factory=list)
    folds: int = 5

    def __post_init__(self):
        if not self.c_values or not self.gamma_values:
            raise ConfigError("grid requires non-empty c_values and gamma_values")
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")

    @classmethod
    def default_classify(cls, folds: int = 5) -> "GridSpec":
        return cls(list(DEFAULT_C_VALUES), list(DEFAULT_GAMMA_VALUES), [], folds)

    @classmethod
    def default_regress(cls, folds: int = 5) -> "GridSpec":
        return cls(
            list(DEFAULT_C_VALUES),
            list(DEFAULT_GAMMA_VALUES),
            list(DEFAULT_EPSILON_VALUES),
            folds,
        )


def _stratified_folds(labels: list, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold id per sample; every class spreads round-robin over all folds."""
    labels_arr = np.array(labels)
    assignment = np.empty(len(labels), dtype=np.int64)
    for cls in sorted(set(labels)):
        rows = np.flatnonzero(labels_arr == cls)
        if rows.size < folds:
            raise FoldsExceedClassCountError(folds, rows.size)
        perm = rows[rng.permutation(rows.size)]
        assignment[perm] = np.arange(perm.size) % folds
    return assignment


def _plain_folds(n: int, folds: int, rng: np.random.Generator) -> np.ndarray:
    if n < folds:
        raise FoldsExceedClassCountError(folds, n)
    assignment = np.empty(n, dtype=np.int64)
    perm = rng.permutation(n)
    assignment[perm] = np.arange(n) % folds
    return assignment


def _subset(sample_set: SampleSet, rows: np.ndarray) -> SampleSet:
    return SampleSet([sample_set.samples[i] for i in rows], seed=sample_set.seed)


def grid_search_cv(
    train: SampleSet,
    grid: GridSpec,
    task: str,
    seed: int,
    kernel_kind: str = RBF,
    target_key: str = "phenol",
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    jobs: int = 1,
) -> tuple[dict, list[dict]]:
    """Returns (best hyperparameters, full cv score table).

    The table has one row per grid point with the per-fold scores and their
    mean; `best` is the row with maximal mean score under the tie-break. The
    fold assignment is fixed up front from the seed, so the outcome does not
    depend on the parallelism degree.
    """
    if task not in (CLASSIFY, REGRESS):
        raise ConfigError(f"unknown grid-search task {task!r}")
    rng = np.random.default_rng(seed)
    if task == CLASSIFY:
        labels = train.labels()
        if any(lb is None for lb in labels):
            raise SingleClassInputError("classification grid search requires labels")
        fold_of = _stratified_folds(labels, grid.folds, rng)
    else:
        fold_of = _plain_folds(len(train), grid.folds, rng)

    cells: list[dict] = []
    eps_values = sorted(grid.epsilon_values) if task == REGRESS else [None]
    if task == REGRESS and not eps_values:
        raise ConfigError("regression grid requires epsilon_values")
    for c in sorted(grid.c_values):
        for gamma in sorted(grid.gamma_values):
            for eps in eps_values:
                cells.append({"c": c, "gamma": gamma, "epsilon": eps})

    scores = np.empty((len(cells), grid.folds), dtype=np.float64)

    def _run(task_id: int) -> None:
        cell_idx, fold = divmod(task_id, grid.folds)
        cell = cells[cell_idx]
        kernel = KernelSpec(kernel_kind, cell["gamma"] if kernel_kind == RBF else None)
        train_rows = np.flatnonzero(fold_of != fold)
        val_rows = np.flatnonzero(fold_of == fold)
        fit_set = _subset(train, train_rows)
        val_set = _subset(train, val_rows)
        if task == CLASSIFY:
            model = train_svc(fit_set, kernel, cell["c"], tol, max_iter)
            pred = predict_svc(model, val_set.spectra_matrix())
            truth = np.array(val_set.labels())
            scores[cell_idx, fold] = float(np.mean(pred == truth))
        else:
            model = train_svr(
                fit_set, target_key, kernel, cell["c"], cell["epsilon"], tol, max_iter
            )
            pred = predict_svr(model, val_set.spectra_matrix())
            truth = val_set.target_values(target_key)
            scores[cell_idx, fold] = -float(np.sqrt(np.mean((truth - pred) ** 2)))

    task_ids = range(len(cells) * grid.folds)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_run, task_ids))
    else:
        for task_id in task_ids:
            _run(task_id)

    table: list[dict] = []
    best_idx = 0
    best_score = -np.inf
    for cell_idx, cell in enumerate(cells):
        mean_score = float(np.mean(scores[cell_idx]))
        row = dict(cell)
        row["fold_scores"] = [float(s) for s in scores[cell_idx]]
        row["score"] = mean_score
        table.append(row)
        if mean_score > best_score:  # strict: first max wins the tie-break
            best_score = mean_score
            best_idx = cell_idx
    best = dict(cells[best_idx])
    best["score"] = best_score
    return best, table
