"""Synthetic hypercubes with known classes, shadows and chemistry targets.

Stands in for the proprietary peat scans: class mean spectra are smooth
curves separated by a controlled multiple of the pixel noise, a contiguous
pixel block is darkened to mimic surface shadows, and raw counts are
back-computed from known dark/white frames so the calibration path is
exercised end to end. Targets are an affine function of the class mean, so a
linear regressor can recover them exactly in the zero-noise limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError
from .hypercube import RAW_COUNTS, REFLECTANCE, Hypercube, ReferenceFrames, WavelengthAxis
from .masking import PixelMask

SHADOW_FACTOR = 0.2
TARGET_SPANS = {"phenol": (50.0, 400.0), "moisture": (20.0, 60.0), "om": (85.0, 97.0)}


@dataclass(frozen=True)
class TargetRule:
    """Affine map from a class mean spectrum to the three chemistry targets."""

    weights: np.ndarray  # (3, bands)
    offsets: np.ndarray  # (3,)
    keys: tuple = ("phenol", "moisture", "om")

    def apply(self, mean_spectrum: np.ndarray) -> dict:
        vals = self.weights @ np.asarray(mean_spectrum, dtype=np.float64) + self.offsets
        return {k: float(v) for k, v in zip(self.keys, vals)}


@dataclass(frozen=True)
class SyntheticSpec:
    n_classes: int = 35
    lines: int = 64
    samples: int = 64
    bands: int = 60
    class_separation: float = 6.0  # spacing of neighbor class means, in noise sigmas
    noise_sigma: float = 0.02
    shadow_fraction: float = 0.1
    target_rule: TargetRule | None = None  # defaults to a seeded rule
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 1 or self.lines < 1 or self.samples < 1 or self.bands < 1:
            raise InvalidSpecError("n_classes, lines, samples, bands must be >= 1")
        if self.class_separation < 0 or self.noise_sigma < 0:
            raise InvalidSpecError("class_separation and noise_sigma must be >= 0")
        if not 0.0 <= self.shadow_fraction < 1.0:
            raise InvalidSpecError("shadow_fraction must be in [0, 1)")

    def label(self, class_id: int) -> str:
        return f"class{class_id:02d}"


@dataclass(frozen=True)
class GeneratedCube:
    raw: Hypercube
    reflectance: Hypercube  # intended ground truth, after shadows and clamping
    refs: ReferenceFrames
    truth_mask: PixelMask  # True on lit pixels
    label: str
    targets: dict
    shadow_pixels: int = 0


def _seed_entropy(seed: int) -> int:
    return seed & (2**63 - 1)


def _shared_rng(spec: SyntheticSpec, stream: int) -> np.random.Generator:
    return np.random.default_rng([_seed_entropy(spec.seed), stream])


def _smooth_curves(rng: np.random.Generator, bands: int, count: int) -> np.ndarray:
    """(bands, count) matrix of smooth random curves built from low sinusoids."""
    u = np.linspace(0.0, 1.0, bands)
    out = np.empty((bands, count))
    for k in range(count):
        freqs = rng.uniform(0.5, 4.0, size=3)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=3)
        amps = rng.uniform(0.3, 1.0, size=3)
        curve = np.zeros(bands)
        for f, ph, a in zip(freqs, phases, amps):
            curve += a * np.sin(2.0 * np.pi * f * u + ph)
        out[:, k] = curve
    return out


def class_means(spec: SyntheticSpec) -> np.ndarray:
    """(n_classes, bands) mean spectra.

    Neighbor means sit class_separation * noise_sigma apart in L2; offset
    directions are orthonormalized whenever bands allows, so farther class
    pairs are farther apart (distance grows with sqrt of the index gap) and
    no two classes collide.
    """
    rng = _shared_rng(spec, 1)
    u = np.linspace(0.0, 1.0, spec.bands)
    base = 0.5 + 0.15 * np.sin(2.0 * np.pi * (1.5 * u + rng.uniform(0.0, 1.0)))
    base += 0.08 * np.sin(2.0 * np.pi * (3.5 * u + rng.uniform(0.0, 1.0)))

    n_dirs = spec.n_classes - 1
    if n_dirs == 0:
        return base[None, :].copy()
    raw_dirs = _smooth_curves(rng, spec.bands, n_dirs)
    if n_dirs <= spec.bands:
        q, _ = np.linalg.qr(raw_dirs)
        dirs = q[:, :n_dirs]
    else:
        dirs = raw_dirs / np.linalg.norm(raw_dirs, axis=0, keepdims=True)

    step = spec.class_separation * spec.noise_sigma
    means = np.empty((spec.n_classes, spec.bands))
    means[0] = base
    for c in range(1, spec.n_classes):
        means[c] = means[c - 1] + step * dirs[:, c - 1]
    return means


def default_target_rule(spec: SyntheticSpec) -> TargetRule:
    """Affine rule scaled so targets span plausible ranges over the classes."""
    rng = _shared_rng(spec, 2)
    means = class_means(spec)
    weights = np.empty((3, spec.bands))
    offsets = np.empty(3)
    for row, key in enumerate(TARGET_SPANS):
        direction = rng.standard_normal(spec.bands)
        direction /= np.linalg.norm(direction)
        z = means @ direction
        zmin, zmax = float(z.min()), float(z.max())
        lo, hi = TARGET_SPANS[key]
        if zmax - zmin < 1e-30:
            weights[row] = 0.0
            offsets[row] = 0.5 * (lo + hi)
        else:
            scale = (hi - lo) / (zmax - zmin)
            weights[row] = scale * direction
            offsets[row] = lo - scale * zmin
    return TargetRule(weights=weights, offsets=offsets)


def reference_frames(spec: SyntheticSpec) -> ReferenceFrames:
    """Dark/white frames with smooth per-column structure, w - d well above 0."""
    rng = _shared_rng(spec, 3)
    s = np.linspace(0.0, 1.0, spec.samples)[:, None]
    b = np.linspace(0.0, 1.0, spec.bands)[None, :]
    dark = 100.0 + 15.0 * np.sin(2.0 * np.pi * (s + b)) + rng.normal(0.0, 1.0, (spec.samples, spec.bands))
    white = 2600.0 + 350.0 * np.cos(2.0 * np.pi * (0.7 * s - 0.4 * b))
    white += rng.normal(0.0, 2.0, (spec.samples, spec.bands))
    return ReferenceFrames(dark=dark, white=white)


def generate_cube(spec: SyntheticSpec, class_id: int) -> GeneratedCube:
    """One scan of the given class: raw counts, references, truth, targets."""
    if not 0 <= class_id < spec.n_classes:
        raise InvalidSpecError(f"class_id {class_id} out of range [0, {spec.n_classes})")

    means = class_means(spec)
    rule = spec.target_rule or default_target_rule(spec)
    refs = reference_frames(spec)

    rng = np.random.default_rng([_seed_entropy(spec.seed), 4, class_id])
    shape = (spec.lines, spec.samples, spec.bands)
    reflect = means[class_id][None, None, :] + spec.noise_sigma * rng.standard_normal(shape)
    np.clip(reflect, 0.0, 2.0, out=reflect)

    n_pixels = spec.lines * spec.samples
    n_shadow = min(int(round(spec.shadow_fraction * n_pixels)), n_pixels - 1)
    flat = reflect.reshape(n_pixels, spec.bands)
    if n_shadow:
        flat[n_pixels - n_shadow :] *= SHADOW_FACTOR
    lit = np.ones(n_pixels, dtype=bool)
    lit[n_pixels - n_shadow :] = False

    denom = refs.white - refs.dark
    raw = refs.dark[None, :, :] + reflect * denom[None, :, :]

    axis = WavelengthAxis(900.0 + np.arange(spec.bands) * (1600.0 / max(spec.bands, 1)))
    return GeneratedCube(
        raw=Hypercube(data=raw, axis=axis, kind=RAW_COUNTS),
        reflectance=Hypercube(data=reflect, axis=axis, kind=REFLECTANCE),
        refs=refs,
        truth_mask=PixelMask(lit.reshape(spec.lines, spec.samples)),
        label=spec.label(class_id),
        targets=rule.apply(means[class_id]),
        shadow_pixels=n_shadow,
    )


def generate_all(spec: SyntheticSpec) -> list[GeneratedCube]:
    return [generate_cube(spec, c) for c in range(spec.n_classes)]
