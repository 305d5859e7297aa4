"""End-to-end pipeline stages shared by the CLI subcommands.

Stage order follows the processing workflow: calibrate raw scans to
reflectance, crop the central ROI, mask shadows with Otsu's threshold, draw
averaged spectral samples, split stratified train/test, grid-search the SVM
hyperparameters, train, evaluate, and report.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import GRADE, RunConfig
from .errors import ConfigError
from .hypercube import (
    Hypercube,
    ReferenceFrames,
    calibrate_reflectance,
    crop_roi,
    load_cube,
    save_cube,
)
from .masking import PixelMask, build_mask, intensity_image, otsu_threshold, save_mask
from .metrics import (
    confusion_matrix,
    grade_report,
    regress_report,
    render_grade_table,
    render_regress_table,
    save_report_json,
)
from .sampling import SampleSet, draw_spectral_samples, save_samples_csv, split_train_test
from .svm import (
    CLASSIFY,
    REGRESS,
    KernelSpec,
    RBF,
    grid_search_cv,
    predict_svc,
    predict_svr,
    save_svc,
    save_svr,
    train_svc,
    train_svr,
)
from .synth import class_means, default_target_rule, generate_all

TARGET_UNITS = {"phenol": "ppm", "moisture": "%", "om": "%"}

_SEED_MASK = 2**63 - 1


def derive_seed(base: int, *keys: int) -> int:
    """Stable per-artifact seed from the run seed and integer context keys."""
    ss = np.random.SeedSequence([base & _SEED_MASK, *(int(k) & _SEED_MASK for k in keys)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class Scan:
    """One scan moving through the pipeline."""

    scan_id: str
    label: str | None
    targets: dict | None
    raw: Hypercube | None = None
    reflectance: Hypercube | None = None
    invalid_pixels: int = 0
    roi: Hypercube | None = None
    mask: PixelMask | None = None
    threshold: float = 0.0


def load_scans(cfg: RunConfig) -> tuple[list[Scan], ReferenceFrames]:
    """Materialize raw cubes and reference frames from either input mode."""
    if cfg.synthetic is not None:
        generated = generate_all(cfg.synthetic)
        refs = generated[0].refs
        scans = [
            Scan(scan_id=g.label, label=g.label, targets=g.targets, raw=g.raw)
            for g in generated
        ]
        return scans, refs
    dark = load_cube(cfg.dark.header, cfg.dark.data)
    white = load_cube(cfg.white.header, cfg.white.data)
    refs = ReferenceFrames.from_cubes(dark, white)
    if cfg.reference_mode == "scalar":
        # collapse to one spectrum per reference, broadcast over columns
        refs = ReferenceFrames.from_spectra(
            refs.dark.mean(axis=0), refs.white.mean(axis=0), samples=refs.dark.shape[0]
        )
    scans = []
    for entry in cfg.scans:
        cube = load_cube(entry.header, entry.data)
        scans.append(
            Scan(scan_id=entry.scan_id, label=entry.label, targets=entry.targets, raw=cube)
        )
    return scans, refs


def calibrate_scans(scans: list[Scan], refs: ReferenceFrames) -> None:
    for scan in scans:
        scan.reflectance, scan.invalid_pixels = calibrate_reflectance(scan.raw, refs)
        scan.raw = None  # free raw counts once converted


def mask_scans(scans: list[Scan], cfg: RunConfig, out_dir: Path | None = None) -> None:
    """Crop the ROI and build the shadow mask for every calibrated scan."""
    for scan in scans:
        scan.roi = crop_roi(scan.reflectance, cfg.roi_fraction)
        image = intensity_image(scan.roi, mode=cfg.mask_mode, band=cfg.mask_band)
        scan.threshold = otsu_threshold(image, bins=cfg.mask_bins)
        scan.mask = build_mask(image, scan.threshold)
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            save_mask(
                scan.mask,
                out_dir / f"{scan.scan_id}.mask",
                out_dir / f"{scan.scan_id}.mask.json",
                threshold=scan.threshold,
                bins=cfg.mask_bins,
                mode=cfg.mask_mode,
                band=cfg.mask_band,
            )


def sample_scans(scans: list[Scan], cfg: RunConfig, group_size: int) -> SampleSet:
    """Draw spectral samples from every scan and merge them into one set."""
    sets = []
    for idx, scan in enumerate(scans):
        seed = derive_seed(cfg.seed, group_size, idx)
        sets.append(
            draw_spectral_samples(
                scan.roi,
                scan.mask,
                group_size,
                seed,
                label=scan.label,
                targets=scan.targets,
                cube_id=scan.scan_id,
            )
        )
    return SampleSet.concat(sets, seed=cfg.seed)


def fit_and_evaluate(
    cfg: RunConfig, train: SampleSet, test: SampleSet, group_size: int
) -> tuple[dict, object]:
    """Grid-search, train the final model, evaluate on the held-out half.

    Returns (run record for the report, trained model).
    """
    grid = cfg.grid_or_default()
    task = CLASSIFY if cfg.task == GRADE else REGRESS
    best, table = grid_search_cv(
        train,
        grid,
        task,
        seed=derive_seed(cfg.seed, group_size, 0xC5),
        kernel_kind=cfg.kernel,
        target_key=cfg.target,
        jobs=cfg.jobs,
    )
    kernel = KernelSpec(cfg.kernel, best["gamma"] if cfg.kernel == RBF else None)
    record: dict = {
        "group_size": group_size,
        "train_count": len(train),
        "test_count": len(test),
        "train_per_class": {
            str(k): v for k, v in sorted(train.class_counts.items(), key=lambda kv: str(kv[0]))
        },
        "best_params": best,
        "cv_table": table,
    }
    if cfg.task == GRADE:
        model = train_svc(train, kernel, best["c"], jobs=cfg.jobs, seed=cfg.seed)
        pred = predict_svc(model, test.spectra_matrix())
        truth = [s.label for s in test.samples]
        matrix = confusion_matrix(truth, list(pred), model.classes)
        report = grade_report(matrix)
        record["report"] = report.to_dict()
        return record, (model, report)
    model = train_svr(
        train, cfg.target, kernel, best["c"], best["epsilon"], seed=cfg.seed
    )
    pred = predict_svr(model, test.spectra_matrix())
    truth = test.target_values(cfg.target)
    report = regress_report(truth, pred)
    record["report"] = report.to_dict()
    record["target"] = cfg.target
    return record, (model, report)


def write_manifest(out_dir: Path) -> Path:
    """Hash every artifact under out_dir into manifest.json (sorted paths)."""
    manifest_path = out_dir / "manifest.json"
    entries = {}
    for path in sorted(out_dir.rglob("*")):
        if not path.is_file() or path == manifest_path:
            continue
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        entries[path.relative_to(out_dir).as_posix()] = f"sha256:{digest}"
    manifest_path.write_text(json.dumps({"files": entries}, sort_keys=True, indent=2) + "\n")
    return manifest_path


def run_pipeline(cfg: RunConfig, echo=print) -> dict:
    """Execute the full workflow and write reports under cfg.out.

    Returns the report document. Identical config and seeds give
    byte-identical artifacts regardless of cfg.jobs.
    """
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    scans, refs = load_scans(cfg)
    echo(f"loaded {len(scans)} scan(s)")
    calibrate_scans(scans, refs)
    total_invalid = sum(s.invalid_pixels for s in scans)
    echo(f"calibrated to reflectance; invalid_pixels={total_invalid}")
    mask_scans(scans, cfg, out_dir / "masks")
    for scan in scans:
        echo(
            f"scan {scan.scan_id}: threshold={scan.threshold:.6f} "
            f"valid={scan.mask.valid_count}/{scan.mask.grid.size}"
        )

    doc: dict = {
        "task": cfg.task,
        "config": cfg.echo(),
        "group_sizes": list(cfg.group_sizes),
        "runs": {},
    }
    final_reports: dict[int, object] = {}
    samples_dir = out_dir / "samples"
    models_dir = out_dir / "models"
    samples_dir.mkdir(parents=True, exist_ok=True)
    models_dir.mkdir(parents=True, exist_ok=True)

    for gs in cfg.group_sizes:
        sample_set = sample_scans(scans, cfg, gs)
        save_samples_csv(
            sample_set,
            samples_dir / f"samples_s{gs}.csv",
            samples_dir / f"samples_s{gs}.json",
            group_size=gs,
            sources={s.scan_id: s.mask.valid_count for s in scans},
        )
        train, test = split_train_test(sample_set, cfg.train_fraction, cfg.seed)
        echo(f"group_size={gs}: {len(sample_set)} samples, train={len(train)} test={len(test)}")
        record, (model, report) = fit_and_evaluate(cfg, train, test, gs)
        if cfg.task == GRADE:
            save_svc(model, models_dir / f"model_s{gs}.json")
            echo(
                f"group_size={gs}: OA={report.oa:.4f} AA={report.aa:.4f} "
                f"kappa={report.kappa:.4f}"
            )
        else:
            save_svr(model, models_dir / f"model_s{gs}.json")
            echo(
                f"group_size={gs}: MAE={report.mae:.4f} RMSE={report.rmse:.4f} "
                f"R2={report.r2 if report.r2_defined else 'undefined'}"
            )
        doc["runs"][str(gs)] = record
        final_reports[gs] = report

    save_report_json(doc, out_dir / "report.json")
    if cfg.task == GRADE:
        table = render_grade_table(final_reports)
    else:
        table = render_regress_table(final_reports, unit=TARGET_UNITS[cfg.target])
    (out_dir / "report.txt").write_text(table)
    write_manifest(out_dir)
    echo(table.rstrip("\n"))
    return doc


# --- stage helpers used by the standalone subcommands -----------------------

def calibrated_dir(out_dir: Path) -> Path:
    return out_dir / "calibrated"


def stage_calibrate(cfg: RunConfig, echo=print) -> list[Scan]:
    """Calibrate every scan and persist reflectance cubes under out/calibrated."""
    out_dir = Path(cfg.out)
    scans, refs = load_scans(cfg)
    calibrate_scans(scans, refs)
    cal_dir = calibrated_dir(out_dir)
    cal_dir.mkdir(parents=True, exist_ok=True)
    for scan in scans:
        save_cube(
            scan.reflectance,
            cal_dir / f"{scan.scan_id}.hdr",
            cal_dir / f"{scan.scan_id}.raw",
        )
        echo(f"scan {scan.scan_id}: invalid_pixels={scan.invalid_pixels}")
    return scans


def reload_calibrated(cfg: RunConfig) -> list[Scan]:
    """Rebuild scan records from previously written reflectance cubes."""
    cal_dir = calibrated_dir(Path(cfg.out))
    if cfg.synthetic is not None:
        spec = cfg.synthetic
        rule = spec.target_rule or default_target_rule(spec)
        means = class_means(spec)
        ids = [spec.label(c) for c in range(spec.n_classes)]
        meta = {
            spec.label(c): (spec.label(c), rule.apply(means[c]))
            for c in range(spec.n_classes)
        }
    else:
        meta = {e.scan_id: (e.label, e.targets) for e in cfg.scans}
        ids = [e.scan_id for e in cfg.scans]
    scans = []
    for scan_id in ids:
        hdr = cal_dir / f"{scan_id}.hdr"
        raw = cal_dir / f"{scan_id}.raw"
        if not hdr.exists():
            raise ConfigError(
                f"calibrated cube {hdr} not found; run the calibrate stage first"
            )
        label, targets = meta[scan_id]
        scans.append(
            Scan(
                scan_id=scan_id,
                label=label,
                targets=targets,
                reflectance=load_cube(hdr, raw),
            )
        )
    return scans
