"""Shadow removal: Otsu threshold on a scalar intensity image.

Shadow pixels depress all bands jointly, so the default intensity image is
the per-pixel mean reflectance over bands. Otsu's threshold maximizes the
between-class variance of the intensity histogram; pixels strictly above the
threshold are kept.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BandOutOfRangeError,
    DegenerateImageError,
    ShapeMismatchError,
)
from .hypercube import Hypercube

MEAN_OVER_BANDS = "mean"
SINGLE_BAND = "band"


@dataclass(frozen=True)
class IntensityImage:
    """Scalar (line, sample) image the threshold operates on."""

    values: np.ndarray
    mode: str = MEAN_OVER_BANDS
    band: int | None = None

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 2:
            raise ShapeMismatchError(f"intensity image must be 2-D, got {vals.shape}")


@dataclass(frozen=True)
class PixelMask:
    """Boolean grid of valid (lit, in-ROI) pixels."""

    grid: np.ndarray

    def __post_init__(self):
        grid = np.ascontiguousarray(self.grid, dtype=bool)
        object.__setattr__(self, "grid", grid)
        if grid.ndim != 2:
            raise ShapeMismatchError(f"mask must be 2-D, got {grid.shape}")

    @property
    def valid_count(self) -> int:
        return int(np.count_nonzero(self.grid))

    @property
    def invalid_count(self) -> int:
        return int(self.grid.size - self.valid_count)


def intensity_image(
    cube: Hypercube, mode: str = MEAN_OVER_BANDS, band: int | None = None
) -> IntensityImage:
    """Collapse a cube to the scalar image Otsu will threshold."""
    if mode == MEAN_OVER_BANDS:
        return IntensityImage(cube.data.mean(axis=2), mode=mode)
    if mode == SINGLE_BAND:
        if band is None or not 0 <= band < cube.bands:
            raise BandOutOfRangeError(-1 if band is None else band, cube.bands)
        return IntensityImage(cube.data[:, :, band].copy(), mode=mode, band=band)
    raise ShapeMismatchError(f"unknown intensity mode {mode!r}")


def argmax_between_class_variance(counts: np.ndarray) -> int:
    """Index k of the histogram edge maximizing sigma_B^2, ties to lowest.

    Splitting at edge k puts bins [0, k) in the dark class. With integer
    histogram counts and bin indices, sigma_B^2(k) is proportional to
    (m0*n - m*s0)^2 / (s0*(n - s0)); candidates are compared by integer
    cross-multiplication, so the argmax is exact with no float rounding.
    """
    n = int(counts.sum())
    m = int(np.dot(counts, np.arange(counts.size)))
    best_k = -1
    best_num = 0  # squared mean gap, scaled
    best_den = 1
    s0 = 0
    m0 = 0
    for k in range(1, counts.size):
        s0 += int(counts[k - 1])
        m0 += (k - 1) * int(counts[k - 1])
        s1 = n - s0
        if s0 == 0 or s1 == 0:
            continue
        num = (m0 * n - m * s0) ** 2
        den = s0 * s1
        # num/den > best_num/best_den, strictly, to keep the lowest edge
        if num * best_den > best_num * den:
            best_k = k
            best_num = num
            best_den = den
    return best_k


def otsu_threshold(image: IntensityImage, bins: int = 256) -> float:
    """Threshold maximizing between-class variance over a `bins`-bin histogram.

    The histogram spans [min, max] with equal-width bins; candidate
    thresholds are the interior bin edges and ties break to the smallest.
    Raises DegenerateImageError when all intensities are equal.
    """
    if bins < 2:
        raise DegenerateImageError("need at least 2 histogram bins")
    values = image.values
    vmin = float(values.min())
    vmax = float(values.max())
    if vmin == vmax:
        raise DegenerateImageError("all intensities equal; no threshold exists")
    counts, edges = np.histogram(values, bins=bins, range=(vmin, vmax))
    k = argmax_between_class_variance(counts)
    if k < 0:
        raise DegenerateImageError("histogram mass concentrated in one bin")
    return float(edges[k])


def build_mask(image: IntensityImage, threshold: float) -> PixelMask:
    """Keep pixels strictly above the threshold (shadows are the dark mode)."""
    return PixelMask(image.values > threshold)


# --- persistence -----------------------------------------------------------

def save_mask(
    mask: PixelMask,
    raster_path: str | Path,
    sidecar_path: str | Path,
    threshold: float,
    bins: int,
    mode: str,
    band: int | None = None,
) -> None:
    """Write the mask as a 1-byte-per-pixel raster plus a JSON sidecar."""
    Path(raster_path).write_bytes(mask.grid.astype(np.uint8).tobytes())
    meta = {
        "lines": int(mask.grid.shape[0]),
        "samples": int(mask.grid.shape[1]),
        "threshold": float(threshold),
        "bins": int(bins),
        "mode": mode,
        "band": band,
        "valid_count": mask.valid_count,
    }
    Path(sidecar_path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def load_mask(raster_path: str | Path, sidecar_path: str | Path) -> tuple[PixelMask, dict]:
    meta = json.loads(Path(sidecar_path).read_text())
    raw = np.frombuffer(Path(raster_path).read_bytes(), dtype=np.uint8)
    grid = raw.reshape(meta["lines"], meta["samples"]).astype(bool)
    return PixelMask(grid), meta
