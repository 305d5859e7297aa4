"""Evaluation measures: confusion matrix, OA/AA/Kappa, MAE/RMSE/R2.

Grading reports overall accuracy (trace ratio), average accuracy (mean
per-class recall, absent classes excluded), and Cohen's Kappa. Regression
reports MAE, RMSE and the coefficient of determination in target units.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyInputError,
    EmptyMatrixError,
    LengthMismatchError,
    UnknownClassError,
)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with rows = true class, columns = predicted class."""

    counts: np.ndarray
    class_ids: list[str]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        k = len(self.class_ids)
        if counts.shape != (k, k):
            raise LengthMismatchError(
                f"counts shape {counts.shape} does not match {k} classes"
            )
        if np.any(counts < 0):
            raise EmptyMatrixError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class GradeReport:
    oa: float
    aa: float
    kappa: float
    matrix: ConfusionMatrix

    def to_dict(self) -> dict:
        return {
            "oa": self.oa,
            "aa": self.aa,
            "kappa": self.kappa,
            "oa_pct": self.oa * 100.0,
            "aa_pct": self.aa * 100.0,
            "kappa_pct": self.kappa * 100.0,
            "classes": list(self.matrix.class_ids),
            "confusion": self.matrix.counts.tolist(),
        }


@dataclass(frozen=True)
class RegressReport:
    mae: float
    rmse: float
    r2: float  # -inf encodes "undefined" (constant truth, imperfect preds)

    @property
    def r2_defined(self) -> bool:
        return math.isfinite(self.r2)

    def to_dict(self) -> dict:
        return {
            "mae": self.mae,
            "rmse": self.rmse,
            "r2": self.r2 if self.r2_defined else None,
            "r2_pct": self.r2 * 100.0 if self.r2_defined else None,
        }


def confusion_matrix(truth, pred, class_ids: list[str]) -> ConfusionMatrix:
    """Count (true, predicted) pairs over the declared class list."""
    truth = list(truth)
    pred = list(pred)
    if len(truth) != len(pred):
        raise LengthMismatchError(f"{len(truth)} truths vs {len(pred)} predictions")
    index = {cls: i for i, cls in enumerate(class_ids)}
    k = len(class_ids)
    counts = np.zeros((k, k), dtype=np.int64)
    for t, p in zip(truth, pred):
        if t not in index:
            raise UnknownClassError(t)
        if p not in index:
            raise UnknownClassError(p)
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(counts=counts, class_ids=list(class_ids))


def grade_report(matrix: ConfusionMatrix) -> GradeReport:
    """OA, AA and Cohen's Kappa from a confusion matrix.

    AA averages per-class recall over classes that actually occur. Kappa's
    chance agreement p_e uses the row/column marginals; the degenerate case
    p_e == 1 maps to kappa 1 for perfect agreement, else 0.
    """
    counts = matrix.counts.astype(np.float64)
    total = counts.sum()
    if total <= 0:
        raise EmptyMatrixError("confusion matrix has no entries")
    oa = float(np.trace(counts) / total)

    row_sums = counts.sum(axis=1)
    present = row_sums > 0
    recalls = np.diag(counts)[present] / row_sums[present]
    aa = float(recalls.mean())

    col_sums = counts.sum(axis=0)
    p_e = float(np.dot(row_sums, col_sums) / (total * total))
    if p_e >= 1.0:
        kappa = 1.0 if oa == 1.0 else 0.0
    else:
        kappa = (oa - p_e) / (1.0 - p_e)
    return GradeReport(oa=oa, aa=aa, kappa=float(kappa), matrix=matrix)


def regress_report(truth, pred) -> RegressReport:
    """MAE, RMSE and R2 in target units.

    With constant truth the usual R2 denominator vanishes: exact predictions
    give R2 = 1, anything else the -inf sentinel (rendered "undefined").
    """
    truth = np.asarray(truth, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    if truth.size == 0:
        raise EmptyInputError("no values to evaluate")
    if truth.shape != pred.shape:
        raise LengthMismatchError(f"{truth.shape} truths vs {pred.shape} predictions")
    err = truth - pred
    mae = float(np.mean(np.abs(err)))
    rmse = float(np.sqrt(np.mean(err * err)))
    sse = float(np.sum(err * err))
    sst = float(np.sum((truth - truth.mean()) ** 2))
    if sst == 0.0:
        r2 = 1.0 if sse == 0.0 else -math.inf
    else:
        r2 = 1.0 - sse / sst
    return RegressReport(mae=mae, rmse=rmse, r2=r2)


# --- rendering -------------------------------------------------------------

def _fmt_pct(value: float) -> str:
    return f"{value * 100.0:.2f}"


def render_grade_table(reports: dict[int, GradeReport]) -> str:
    """Plain-text table, one column per group size: rows OA / AA / KP (%)."""
    sizes = sorted(reports)
    width = 10
    header = "s".ljust(6) + "".join(str(s).rjust(width) for s in sizes)
    rows = [header]
    for name, attr in (("OA", "oa"), ("AA", "aa"), ("KP", "kappa")):
        cells = "".join(_fmt_pct(getattr(reports[s], attr)).rjust(width) for s in sizes)
        rows.append(name.ljust(6) + cells)
    return "\n".join(rows) + "\n"


def render_regress_table(reports: dict[int, RegressReport], unit: str = "ppm") -> str:
    """Plain-text table, one column per group size: rows MAE / RMSE / R2."""
    sizes = sorted(reports)
    width = 12
    header = "s".ljust(12) + "".join(str(s).rjust(width) for s in sizes)
    rows = [header]
    rows.append(
        f"MAE ({unit})".ljust(12)
        + "".join(f"{reports[s].mae:.2f}".rjust(width) for s in sizes)
    )
    rows.append(
        f"RMSE ({unit})".ljust(12)
        + "".join(f"{reports[s].rmse:.2f}".rjust(width) for s in sizes)
    )
    rows.append(
        "R^2 (%)".ljust(12)
        + "".join(
            (_fmt_pct(reports[s].r2) if reports[s].r2_defined else "undefined").rjust(width)
            for s in sizes
        )
    )
    return "\n".join(rows) + "\n"


def save_report_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
