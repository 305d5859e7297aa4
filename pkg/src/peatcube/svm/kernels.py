"""Kernel functions and Gram matrix construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

LINEAR = "linear"
RBF = "rbf"


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in (LINEAR, RBF):
            raise ConfigError(f"unknown kernel kind {self.kind!r}")
        if self.kind == RBF:
            if self.gamma is None or not self.gamma > 0:
                raise ConfigError(f"rbf kernel requires gamma > 0, got {self.gamma}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(kind=d["kind"], gamma=d.get("gamma"))


def gram(spec: KernelSpec, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Gram matrix K[i, j] = k(x_i, z_j)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    if spec.kind == LINEAR:
        return x @ z.T
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        + np.sum(z * z, axis=1)[None, :]
        - 2.0 * (x @ z.T)
    )
    np.clip(d2, 0.0, None, out=d2)
    return np.exp(-spec.gamma * d2)


def gram_self(spec: KernelSpec, x: np.ndarray) -> np.ndarray:
    """Self Gram matrix; the rbf diagonal is exactly 1."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if spec.kind == LINEAR:
        return x @ x.T
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.clip(d2, 0.0, None, out=d2)
    np.fill_diagonal(d2, 0.0)
    return np.exp(-spec.gamma * d2)
