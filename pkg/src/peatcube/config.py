"""Run configuration: one declarative JSON document drives the pipeline.

Exactly one of input.scans (real header/binary pairs plus dark and white
references) or synthetic (a generator spec) must be present. CLI flags
override individual fields after the file is parsed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .svm.gridsearch import GridSpec
from .svm.kernels import LINEAR, RBF
from .synth import SyntheticSpec

GRADE = "grade"
PREDICT = "predict"
TARGETS = ("phenol", "moisture", "om")


@dataclass
class ScanEntry:
    header: str
    data: str
    label: str | None = None
    targets: dict | None = None
    scan_id: str = ""

    def __post_init__(self):
        if not self.scan_id:
            self.scan_id = self.label or Path(self.header).stem


@dataclass
class RunConfig:
    synthetic: SyntheticSpec | None = None
    scans: list[ScanEntry] = field(default_factory=list)
    dark: ScanEntry | None = None
    white: ScanEntry | None = None
    reference_mode: str = "per_column"  # or "scalar": one spectrum, broadcast
    roi_fraction: float = 0.8
    mask_mode: str = "mean"
    mask_band: int | None = None
    mask_bins: int = 256
    group_sizes: list[int] = field(default_factory=lambda: [50])
    train_fraction: float = 0.05
    task: str = GRADE
    target: str = "phenol"
    kernel: str = RBF
    grid: GridSpec | None = None  # None = spec defaults for the task
    seed: int = 42
    jobs: int = 1
    out: str = "peatcube-out"

    def validate(self) -> None:
        has_real = bool(self.scans)
        has_synth = self.synthetic is not None
        if has_real == has_synth:
            raise ConfigError(
                "exactly one of input.scans or synthetic must be present"
            )
        if has_real:
            if self.dark is None:
                raise ConfigError("input.dark is required with real scans")
            if self.white is None:
                raise ConfigError("input.white is required with real scans")
        if self.reference_mode not in ("per_column", "scalar"):
            raise ConfigError(
                f"reference_mode must be 'per_column' or 'scalar', got {self.reference_mode!r}"
            )
        if not 0.0 < self.roi_fraction <= 1.0:
            raise ConfigError(f"roi_fraction must be in (0, 1], got {self.roi_fraction}")
        if self.mask_mode not in ("mean", "band"):
            raise ConfigError(f"mask.mode must be 'mean' or 'band', got {self.mask_mode!r}")
        if self.mask_bins < 2:
            raise ConfigError(f"mask.bins must be >= 2, got {self.mask_bins}")
        if not self.group_sizes or any(g < 1 for g in self.group_sizes):
            raise ConfigError(f"group_size values must be >= 1, got {self.group_sizes}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )
        if self.task not in (GRADE, PREDICT):
            raise ConfigError(f"task must be 'grade' or 'predict', got {self.task!r}")
        if self.task == PREDICT and self.target not in TARGETS:
            raise ConfigError(f"target must be one of {TARGETS}, got {self.target!r}")
        if self.kernel not in (RBF, LINEAR):
            raise ConfigError(f"kernel must be 'rbf' or 'linear', got {self.kernel!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")

    def grid_or_default(self) -> GridSpec:
        if self.grid is not None:
            return self.grid
        if self.task == PREDICT:
            return GridSpec.default_regress()
        return GridSpec.default_classify()

    def echo(self) -> dict:
        """JSON-safe snapshot of the effective configuration."""
        doc: dict = {
            "reference_mode": self.reference_mode,
            "roi_fraction": self.roi_fraction,
            "mask": {"mode": self.mask_mode, "band": self.mask_band, "bins": self.mask_bins},
            "group_sizes": list(self.group_sizes),
            "train_fraction": self.train_fraction,
            "task": self.task,
            "target": self.target if self.task == PREDICT else None,
            "kernel": self.kernel,
            "seed": self.seed,
        }
        if self.synthetic is not None:
            doc["synthetic"] = {
                "n_classes": self.synthetic.n_classes,
                "lines": self.synthetic.lines,
                "samples": self.synthetic.samples,
                "bands": self.synthetic.bands,
                "class_separation": self.synthetic.class_separation,
                "noise_sigma": self.synthetic.noise_sigma,
                "shadow_fraction": self.synthetic.shadow_fraction,
                "seed": self.synthetic.seed,
            }
        else:
            doc["scans"] = [s.scan_id for s in self.scans]
        grid = self.grid_or_default()
        doc["grid"] = {
            "c": list(grid.c_values),
            "gamma": list(grid.gamma_values),
            "epsilon": list(grid.epsilon_values),
            "folds": grid.folds,
        }
        return doc


def _parse_scan(entry: dict, what: str) -> ScanEntry:
    if not isinstance(entry, dict):
        raise ConfigError(f"{what} must be an object with header/data paths")
    for key in ("header", "data"):
        if key not in entry:
            raise ConfigError(f"{what}.{key} is required")
    return ScanEntry(
        header=str(entry["header"]),
        data=str(entry["data"]),
        label=entry.get("label"),
        targets=entry.get("targets"),
        scan_id=entry.get("scan_id", ""),
    )


def _parse_synthetic(doc: dict) -> SyntheticSpec:
    allowed = {
        "n_classes",
        "lines",
        "samples",
        "bands",
        "class_separation",
        "noise_sigma",
        "shadow_fraction",
        "seed",
    }
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown synthetic fields: {sorted(unknown)}")
    try:
        return SyntheticSpec(**doc)
    except TypeError as exc:
        raise ConfigError(f"invalid synthetic spec: {exc}") from None


def _parse_grid(doc: dict) -> GridSpec:
    try:
        return GridSpec(
            c_values=[float(v) for v in doc["c"]],
            gamma_values=[float(v) for v in doc.get("gamma", [1.0])],
            epsilon_values=[float(v) for v in doc.get("epsilon", [])],
            folds=int(doc.get("folds", 5)),
        )
    except KeyError as exc:
        raise ConfigError(f"grid.{exc.args[0]} is required") from None


def config_from_dict(doc: dict) -> RunConfig:
    cfg = RunConfig()
    inp = doc.get("input", {})
    if "scans" in inp:
        cfg.scans = [
            _parse_scan(e, f"input.scans[{i}]") for i, e in enumerate(inp["scans"])
        ]
    if "dark" in inp:
        cfg.dark = _parse_scan(inp["dark"], "input.dark")
    if "white" in inp:
        cfg.white = _parse_scan(inp["white"], "input.white")
    if "synthetic" in doc and doc["synthetic"] is not None:
        cfg.synthetic = _parse_synthetic(doc["synthetic"])

    mask = doc.get("mask", {})
    cfg.mask_mode = mask.get("mode", cfg.mask_mode)
    cfg.mask_band = mask.get("band", cfg.mask_band)
    cfg.mask_bins = int(mask.get("bins", cfg.mask_bins))

    if "reference_mode" in doc:
        cfg.reference_mode = str(doc["reference_mode"])
    if "roi_fraction" in doc:
        cfg.roi_fraction = float(doc["roi_fraction"])
    if "group_size" in doc:
        gs = doc["group_size"]
        cfg.group_sizes = [int(g) for g in gs] if isinstance(gs, list) else [int(gs)]
    if "train_fraction" in doc:
        cfg.train_fraction = float(doc["train_fraction"])
    cfg.task = doc.get("task", cfg.task)
    cfg.target = doc.get("target", cfg.target)
    cfg.kernel = doc.get("kernel", cfg.kernel)
    if "grid" in doc and doc["grid"] is not None:
        cfg.grid = _parse_grid(doc["grid"])
    if "seed" in doc:
        cfg.seed = int(doc["seed"])
    if "jobs" in doc:
        cfg.jobs = int(doc["jobs"])
    if "out" in doc:
        cfg.out = str(doc["out"])
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    return config_from_dict(doc)
