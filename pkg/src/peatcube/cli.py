"""Command-line front end.

Subcommands mirror the pipeline stages so each is independently testable:
synth, calibrate, mask, sample, train, evaluate, and run (the whole flow).
Exit codes: 0 ok, 2 config error, 3 I/O or data-format error, 4 numeric or
convergence error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import GRADE, PREDICT, RunConfig, load_config
from .errors import ConfigError, DataFormatError, NumericError, PeatcubeError
from .hypercube import RAW_COUNTS, Hypercube, save_cube
from .metrics import (
    confusion_matrix,
    grade_report,
    regress_report,
    save_report_json,
)
from .pipeline import (
    TARGET_UNITS,
    fit_and_evaluate,
    mask_scans,
    reload_calibrated,
    run_pipeline,
    sample_scans,
    stage_calibrate,
    write_manifest,
)
from .sampling import load_samples_csv, save_samples_csv, split_train_test
from .svm import load_svc, load_svr, predict_svc, predict_svr, save_svc, save_svr
from .synth import generate_all

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if getattr(args, "group_size", None) is not None:
        cfg.group_sizes = [int(g) for g in args.group_size]
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None) is not None:
        cfg.out = args.out
    if getattr(args, "jobs", None) is not None:
        cfg.jobs = args.jobs
    if getattr(args, "train_fraction", None) is not None:
        cfg.train_fraction = args.train_fraction
    if getattr(args, "roi_fraction", None) is not None:
        cfg.roi_fraction = args.roi_fraction
    if getattr(args, "task", None) is not None:
        cfg.task = args.task
    if getattr(args, "target", None) is not None:
        cfg.target = args.target
    cfg.validate()
    return cfg


def _load(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    return _apply_overrides(cfg, args)


def cmd_synth(args: argparse.Namespace) -> int:
    """Write synthetic ENVI fixtures plus ground-truth sidecars."""
    cfg = _load(args)
    if cfg.synthetic is None:
        raise ConfigError("synth requires a synthetic spec in the config")
    out_dir = Path(cfg.out) / "scans"
    out_dir.mkdir(parents=True, exist_ok=True)
    generated = generate_all(cfg.synthetic)

    refs = generated[0].refs
    ref_lines = 8
    axis = generated[0].raw.axis
    for name, frame in (("dark", refs.dark), ("white", refs.white)):
        cube = Hypercube(
            data=np.repeat(frame[None, :, :], ref_lines, axis=0),
            axis=axis,
            kind=RAW_COUNTS,
        )
        save_cube(cube, out_dir / f"{name}.hdr", out_dir / f"{name}.raw")

    scan_entries = []
    for g in generated:
        hdr = out_dir / f"{g.label}.hdr"
        raw = out_dir / f"{g.label}.raw"
        save_cube(g.raw, hdr, raw)
        truth_path = out_dir / f"{g.label}.truth.json"
        mask_path = out_dir / f"{g.label}.shadow.mask"
        mask_path.write_bytes(g.truth_mask.grid.astype("u1").tobytes())
        spec = cfg.synthetic
        truth_path.write_text(
            json.dumps(
                {
                    "label": g.label,
                    "targets": g.targets,
                    "shadow_pixels": g.shadow_pixels,
                    "shadow_mask": mask_path.name,
                    "lines": g.raw.lines,
                    "samples": g.raw.samples,
                    "bands": g.raw.bands,
                    "spec": {
                        "n_classes": spec.n_classes,
                        "class_separation": spec.class_separation,
                        "noise_sigma": spec.noise_sigma,
                        "shadow_fraction": spec.shadow_fraction,
                        "seed": spec.seed,
                    },
                },
                sort_keys=True,
                indent=2,
            )
            + "\n"
        )
        scan_entries.append(
            {
                "header": str(hdr),
                "data": str(raw),
                "label": g.label,
                "targets": g.targets,
            }
        )
        print(f"wrote {g.label}: {g.raw.lines}x{g.raw.samples}x{g.raw.bands}")

    listing = {
        "scans": scan_entries,
        "dark": {"header": str(out_dir / "dark.hdr"), "data": str(out_dir / "dark.raw")},
        "white": {"header": str(out_dir / "white.hdr"), "data": str(out_dir / "white.raw")},
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(listing, sort_keys=True, indent=2) + "\n"
    )
    print(f"fixture manifest: {out_dir / 'manifest.json'}")
    return EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    stage_calibrate(cfg)
    return EXIT_OK


def cmd_mask(args: argparse.Namespace) -> int:
    cfg = _load(args)
    scans = reload_calibrated(cfg)
    mask_scans(scans, cfg, Path(cfg.out) / "masks")
    for scan in scans:
        print(
            f"scan {scan.scan_id}: threshold={scan.threshold:.6f} "
            f"valid={scan.mask.valid_count}/{scan.mask.grid.size}"
        )
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    cfg = _load(args)
    scans = reload_calibrated(cfg)
    mask_scans(scans, cfg)
    samples_dir = Path(cfg.out) / "samples"
    samples_dir.mkdir(parents=True, exist_ok=True)
    for gs in cfg.group_sizes:
        sample_set = sample_scans(scans, cfg, gs)
        save_samples_csv(
            sample_set,
            samples_dir / f"samples_s{gs}.csv",
            samples_dir / f"samples_s{gs}.json",
            group_size=gs,
            sources={s.scan_id: s.mask.valid_count for s in scans},
        )
        print(f"group_size={gs}: wrote {len(sample_set)} samples")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _load(args)
    samples_dir = Path(cfg.out) / "samples"
    models_dir = Path(cfg.out) / "models"
    models_dir.mkdir(parents=True, exist_ok=True)
    for gs in cfg.group_sizes:
        csv_path = samples_dir / f"samples_s{gs}.csv"
        if not csv_path.exists():
            raise ConfigError(f"{csv_path} not found; run the sample stage first")
        sample_set = load_samples_csv(csv_path, seed=cfg.seed)
        train, test = split_train_test(sample_set, cfg.train_fraction, cfg.seed)
        record, (model, _report) = fit_and_evaluate(cfg, train, test, gs)
        if cfg.task == GRADE:
            save_svc(model, models_dir / f"model_s{gs}.json")
        else:
            save_svr(model, models_dir / f"model_s{gs}.json")
        best = record["best_params"]
        print(f"group_size={gs}: best={best}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    samples_dir = Path(cfg.out) / "samples"
    models_dir = Path(cfg.out) / "models"
    out_dir = Path(cfg.out)
    doc: dict = {"task": cfg.task, "runs": {}}
    for gs in cfg.group_sizes:
        csv_path = samples_dir / f"samples_s{gs}.csv"
        model_path = models_dir / f"model_s{gs}.json"
        if not csv_path.exists() or not model_path.exists():
            raise ConfigError(
                f"missing {csv_path} or {model_path}; run sample and train first"
            )
        sample_set = load_samples_csv(csv_path, seed=cfg.seed)
        _train, test = split_train_test(sample_set, cfg.train_fraction, cfg.seed)
        if cfg.task == GRADE:
            model = load_svc(model_path)
            pred = predict_svc(model, test.spectra_matrix())
            truth = [s.label for s in test.samples]
            report = grade_report(confusion_matrix(truth, list(pred), model.classes))
            print(
                f"group_size={gs}: OA={report.oa:.4f} AA={report.aa:.4f} "
                f"kappa={report.kappa:.4f}"
            )
        else:
            model = load_svr(model_path)
            pred = predict_svr(model, test.spectra_matrix())
            truth = test.target_values(cfg.target)
            report = regress_report(truth, pred)
            print(f"group_size={gs}: MAE={report.mae:.4f} RMSE={report.rmse:.4f}")
        doc["runs"][str(gs)] = report.to_dict()
    save_report_json(doc, out_dir / "report.json")
    write_manifest(out_dir)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args)
    run_pipeline(cfg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peatcube",
        description="Hyperspectral peat grading and property-prediction pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="path to the run config JSON")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="random seed (overrides config)")
        p.add_argument(
            "--group-size",
            type=int,
            nargs="+",
            help="pixel group size(s) s (overrides config)",
        )
        p.add_argument("--jobs", type=int, help="parallel workers (overrides config)")
        p.add_argument(
            "--train-fraction", type=float, help="training fraction (overrides config)"
        )
        p.add_argument(
            "--roi-fraction", type=float, help="central ROI fraction (overrides config)"
        )
        p.add_argument("--task", choices=[GRADE, PREDICT], help="overrides config")
        p.add_argument(
            "--target",
            choices=sorted(TARGET_UNITS),
            help="regression target (overrides config)",
        )

    for name, handler, blurb in (
        ("synth", cmd_synth, "generate synthetic ENVI fixtures"),
        ("calibrate", cmd_calibrate, "convert raw scans to reflectance cubes"),
        ("mask", cmd_mask, "crop the ROI and build shadow masks"),
        ("sample", cmd_sample, "draw averaged spectral samples to CSV"),
        ("train", cmd_train, "grid-search and train models from sample CSVs"),
        ("evaluate", cmd_evaluate, "evaluate saved models on the test split"),
        ("run", cmd_run, "run the full pipeline end to end"),
    ):
        p = sub.add_parser(name, help=blurb)
        add_common(p)
        p.set_defaults(handler=handler)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except PeatcubeError as exc:  # anything else from the pipeline
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
