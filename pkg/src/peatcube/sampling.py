"""Spectral sample extraction and train/test splitting.

Valid pixels are shuffled once with a seeded generator, partitioned into
floor(M / group_size) disjoint groups, and each group's per-band mean becomes
one spectral sample. Samples inherit the class label and chemistry targets of
their source scan. Phenol distribution over the surface is uneven, which is
what the group averaging compensates for.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DataFormatError,
    EmptyClassError,
    InsufficientPixelsError,
    ShapeMismatchError,
)
from .hypercube import Hypercube
from .masking import PixelMask

TARGET_KEYS = ("phenol", "moisture", "om")


@dataclass(frozen=True)
class SpectralSample:
    """One averaged spectrum plus the provenance of its member pixels."""

    spectrum: np.ndarray
    label: str | None = None
    targets: dict | None = None
    cube_id: str = ""
    pixel_indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        object.__setattr__(
            self, "spectrum", np.ascontiguousarray(self.spectrum, dtype=np.float64)
        )
        object.__setattr__(
            self, "pixel_indices", np.asarray(self.pixel_indices, dtype=np.int64)
        )


@dataclass
class SampleSet:
    """A collection of spectral samples with the seed that produced them."""

    samples: list[SpectralSample]
    seed: int = 0

    @property
    def class_counts(self) -> Counter:
        return Counter(s.label for s in self.samples)

    @property
    def bands(self) -> int:
        return int(self.samples[0].spectrum.size) if self.samples else 0

    def __len__(self) -> int:
        return len(self.samples)

    def spectra_matrix(self) -> np.ndarray:
        return np.vstack([s.spectrum for s in self.samples])

    def labels(self) -> list[str | None]:
        return [s.label for s in self.samples]

    def target_values(self, key: str) -> np.ndarray:
        vals = []
        for s in self.samples:
            if s.targets is None or key not in s.targets:
                raise DataFormatError(f"sample missing target {key!r}")
            vals.append(float(s.targets[key]))
        return np.array(vals, dtype=np.float64)

    @classmethod
    def concat(cls, sets: list["SampleSet"], seed: int) -> "SampleSet":
        merged: list[SpectralSample] = []
        for s in sets:
            merged.extend(s.samples)
        return cls(samples=merged, seed=seed)


def draw_spectral_samples(
    cube: Hypercube,
    mask: PixelMask,
    group_size: int,
    seed: int,
    label: str | None = None,
    targets: dict | None = None,
    cube_id: str = "",
) -> SampleSet:
    """Average disjoint random pixel groups into spectral samples.

    Produces exactly floor(valid_count / group_size) samples; leftover pixels
    are discarded. The same seed reproduces the same set bit for bit.
    """
    if group_size < 1:
        raise InsufficientPixelsError(mask.valid_count, group_size)
    if mask.grid.shape != (cube.lines, cube.samples):
        raise ShapeMismatchError(
            f"mask shape {mask.grid.shape} does not match cube spatial extent "
            f"({cube.lines}, {cube.samples})"
        )
    m = mask.valid_count
    if m < group_size:
        raise InsufficientPixelsError(m, group_size)

    valid_flat = np.flatnonzero(mask.grid.reshape(-1))
    rng = np.random.default_rng(seed)
    order = rng.permutation(m)
    n_groups = m // group_size
    chosen = valid_flat[order[: n_groups * group_size]]
    groups = chosen.reshape(n_groups, group_size)

    pixels = cube.data.reshape(-1, cube.bands)
    means = pixels[groups].mean(axis=1)

    samples = [
        SpectralSample(
            spectrum=means[g],
            label=label,
            targets=dict(targets) if targets else None,
            cube_id=cube_id,
            pixel_indices=np.sort(groups[g]),
        )
        for g in range(n_groups)
    ]
    return SampleSet(samples=samples, seed=seed)


def _train_count(fraction: float, count: int) -> int:
    # ceil on the decimal reading of the fraction: 0.05 * 2080 must be
    # exactly 104, which naive binary-float ceil does not guarantee
    return max(1, math.ceil(Fraction(str(fraction)) * count))


def split_train_test(
    sample_set: SampleSet, train_fraction: float, seed: int
) -> tuple[SampleSet, SampleSet]:
    """Stratified split: per class, ceil(fraction * count), minimum 1, to train.

    Classes are processed in sorted order with a per-class seeded shuffle, so
    the split is a deterministic partition of the input set.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if not sample_set.samples:
        raise EmptyClassError("cannot split an empty sample set")

    by_class: dict = {}
    for idx, s in enumerate(sample_set.samples):
        by_class.setdefault(s.label, []).append(idx)

    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for label in sorted(by_class, key=lambda v: (v is None, v)):
        members = np.array(by_class[label], dtype=np.int64)
        if members.size == 0:
            raise EmptyClassError(f"class {label!r} has no samples")
        perm = members[rng.permutation(members.size)]
        n_train = _train_count(train_fraction, members.size)
        train_idx.extend(perm[:n_train].tolist())
        test_idx.extend(perm[n_train:].tolist())

    train = SampleSet([sample_set.samples[i] for i in train_idx], seed=seed)
    test = SampleSet([sample_set.samples[i] for i in test_idx], seed=seed)
    return train, test


# --- persistence -----------------------------------------------------------

def save_samples_csv(
    sample_set: SampleSet,
    csv_path: str | Path,
    sidecar_path: str | Path | None = None,
    group_size: int | None = None,
    sources: dict | None = None,
) -> None:
    """Write samples as CSV plus an optional JSON sidecar.

    Columns: label, the three chemistry targets (blank when absent), then one
    column per band. Float cells use repr, so a round trip is exact.
    """
    if not sample_set.samples:
        raise EmptyClassError("refusing to write an empty sample set")
    bands = sample_set.bands
    header = ["label", "target_phenol", "target_moisture", "target_om"]
    header += [f"b{i}" for i in range(bands)]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s in sample_set.samples:
            row = [s.label if s.label is not None else ""]
            for key in TARGET_KEYS:
                if s.targets is not None and key in s.targets:
                    row.append(repr(float(s.targets[key])))
                else:
                    row.append("")
            row.extend(repr(float(v)) for v in s.spectrum)
            writer.writerow(row)
    if sidecar_path is not None:
        meta = {
            "seed": sample_set.seed,
            "group_size": group_size,
            "sources": sources or {},
            "count": len(sample_set),
        }
        Path(sidecar_path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def load_samples_csv(csv_path: str | Path, seed: int = 0) -> SampleSet:
    samples: list[SpectralSample] = []
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n_meta = 4
        bands = len(header) - n_meta
        if bands < 1 or header[0] != "label":
            raise ShapeMismatchError(f"unrecognized sample CSV header: {header[:5]}")
        for row in reader:
            label = row[0] or None
            targets = {}
            for key, cell in zip(TARGET_KEYS, row[1:n_meta]):
                if cell:
                    targets[key] = float(cell)
            spectrum = np.array([float(c) for c in row[n_meta:]], dtype=np.float64)
            samples.append(
                SpectralSample(
                    spectrum=spectrum,
                    label=label,
                    targets=targets or None,
                )
            )
    return SampleSet(samples=samples, seed=seed)
