"""Per-band z-score standardization, fitted on training data only."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatchError, EmptyTrainingSetError

STD_FLOOR = 1e-12


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray  # population std, floored at STD_FLOOR

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64))
        object.__setattr__(self, "std", np.asarray(self.std, dtype=np.float64))

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.mean.size:
            raise DimensionMismatchError(x.shape[-1], self.mean.size)
        return (x - self.mean) / self.std

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.array(d["mean"], dtype=np.float64), np.array(d["std"], dtype=np.float64))


def fit_standardizer(x: np.ndarray) -> Standardizer:
    """Fit per-band mean and population std on a (samples, bands) matrix."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.size == 0:
        raise EmptyTrainingSetError("cannot fit a standardizer on no samples")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    return Standardizer(mean=mean, std=np.maximum(std, STD_FLOOR))
