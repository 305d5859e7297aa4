"""CLI subcommands: stage-wise flow, real ENVI inputs, exit codes."""

import json

import numpy as np

from peatcube.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from peatcube.hypercube import load_cube
from peatcube.sampling import load_samples_csv
from peatcube.synth import SyntheticSpec, generate_cube

SYNTH_BLOCK = {
    "n_classes": 3,
    "lines": 28,
    "samples": 28,
    "bands": 16,
    "class_separation": 8.0,
    "noise_sigma": 0.02,
    "shadow_fraction": 0.2,
    "seed": 21,
}

GRID_BLOCK = {"c": [10.0], "gamma": [0.1], "folds": 2}


def write_config(tmp_path, name="cfg.json", **overrides):
    doc = {
        "synthetic": dict(SYNTH_BLOCK),
        "group_size": [10],
        "train_fraction": 0.2,
        "task": "grade",
        "grid": dict(GRID_BLOCK),
        "seed": 5,
        "roi_fraction": 0.9,
    }
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


class TestRun:
    def test_full_run_writes_reports(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["task"] == "grade"
        assert "oa" in report["runs"]["10"]["report"]
        assert report["runs"]["10"]["report"]["oa"] >= 0.99
        assert (out / "report.txt").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert "report.json" in manifest["files"]
        assert any(k.startswith("masks/") for k in manifest["files"])
        assert any(k.startswith("samples/") for k in manifest["files"])
        assert any(k.startswith("models/") for k in manifest["files"])

    def test_group_size_sweep_one_column_each(self, tmp_path):
        cfg = write_config(tmp_path, group_size=[5, 10])
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        table = (out / "report.txt").read_text()
        header = table.splitlines()[0].split()
        assert header == ["s", "5", "10"]
        report = json.loads((out / "report.json").read_text())
        assert set(report["runs"]) == {"5", "10"}

    def test_train_counts_logged_per_class(self, tmp_path):
        cfg = write_config(tmp_path, train_fraction=0.2)
        out = tmp_path / "out"
        main(["run", "--config", str(cfg), "--out", str(out)])
        report = json.loads((out / "report.json").read_text())
        per_class = report["runs"]["10"]["train_per_class"]
        assert len(per_class) == 3
        # ceil(0.2 * count) samples per class
        total = report["runs"]["10"]["train_count"]
        assert total == sum(per_class.values())

    def test_predict_task(self, tmp_path):
        cfg = write_config(
            tmp_path,
            task="predict",
            target="phenol",
            grid={"c": [100.0], "gamma": [0.1], "epsilon": [1.0], "folds": 2},
        )
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        rep = report["runs"]["10"]["report"]
        assert rep["rmse"] >= rep["mae"]
        assert "MAE (ppm)" in (out / "report.txt").read_text()


class TestExitCodes:
    def test_invalid_config_is_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"task": "grade"}))  # neither scans nor synthetic
        assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG
        assert "exactly one of" in capsys.readouterr().err

    def test_malformed_json_is_2(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text("{not json")
        assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG

    def test_missing_config_file_is_2(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG

    def test_missing_white_named_in_error(self, tmp_path, capsys):
        doc = {
            "input": {
                "scans": [{"header": "x.hdr", "data": "x.raw"}],
                "dark": {"header": "d.hdr", "data": "d.raw"},
            },
            "task": "grade",
        }
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(doc))
        assert main(["calibrate", "--config", str(cfg)]) == EXIT_CONFIG
        assert "input.white" in capsys.readouterr().err

    def test_numeric_error_is_4(self, tmp_path):
        from peatcube.cli import EXIT_NUMERIC

        # group_size far above the pixel budget -> InsufficientPixels
        cfg = write_config(tmp_path, group_size=[10**6])
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == EXIT_NUMERIC

    def test_missing_scan_file_is_3(self, tmp_path):
        doc = {
            "input": {
                "scans": [{"header": str(tmp_path / "x.hdr"), "data": str(tmp_path / "x.raw")}],
                "dark": {"header": str(tmp_path / "d.hdr"), "data": str(tmp_path / "d.raw")},
                "white": {"header": str(tmp_path / "w.hdr"), "data": str(tmp_path / "w.raw")},
            },
            "task": "grade",
            "out": str(tmp_path / "out"),
        }
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(doc))
        assert main(["calibrate", "--config", str(cfg)]) == EXIT_IO


class TestStageFlow:
    def test_synth_then_stages(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "ws"
        base = ["--config", str(cfg), "--out", str(out)]
        assert main(["synth", *base]) == EXIT_OK
        fixture = json.loads((out / "scans" / "manifest.json").read_text())
        assert len(fixture["scans"]) == 3
        assert (out / "scans" / "dark.hdr").exists()

        assert main(["calibrate", *base]) == EXIT_OK
        cal = load_cube(out / "calibrated" / "class00.hdr", out / "calibrated" / "class00.raw")
        assert cal.kind == "reflectance"
        g = generate_cube(SyntheticSpec(**SYNTH_BLOCK), 0)
        np.testing.assert_allclose(cal.data, g.reflectance.data, rtol=0, atol=1e-6)

        assert main(["mask", *base]) == EXIT_OK
        meta = json.loads((out / "masks" / "class00.mask.json").read_text())
        assert meta["valid_count"] > 0

        assert main(["sample", *base]) == EXIT_OK
        sset = load_samples_csv(out / "samples" / "samples_s10.csv")
        assert len(sset) > 0
        assert sset.samples[0].targets is not None

        assert main(["train", *base]) == EXIT_OK
        assert (out / "models" / "model_s10.json").exists()

        assert main(["evaluate", *base]) == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["runs"]["10"]["oa"] >= 0.99

    def test_real_mode_from_synth_fixtures(self, tmp_path):
        cfg = write_config(tmp_path)
        fixtures = tmp_path / "fx"
        assert main(["synth", "--config", str(cfg), "--out", str(fixtures)]) == EXIT_OK
        listing = json.loads((fixtures / "scans" / "manifest.json").read_text())

        real_cfg = {
            "input": listing,
            "group_size": 10,
            "train_fraction": 0.2,
            "task": "grade",
            "grid": dict(GRID_BLOCK),
            "seed": 5,
            "roi_fraction": 0.9,
        }
        cfg2 = tmp_path / "real.json"
        cfg2.write_text(json.dumps(real_cfg))
        out = tmp_path / "out_real"
        assert main(["run", "--config", str(cfg2), "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["runs"]["10"]["report"]["oa"] >= 0.99
        assert report["config"]["scans"] == ["class00", "class01", "class02"]

    def test_scalar_reference_mode(self, tmp_path):
        cfg = write_config(tmp_path)
        fixtures = tmp_path / "fx"
        main(["synth", "--config", str(cfg), "--out", str(fixtures)])
        listing = json.loads((fixtures / "scans" / "manifest.json").read_text())
        real_cfg = {
            "input": listing,
            "reference_mode": "scalar",
            "group_size": 10,
            "train_fraction": 0.2,
            "task": "grade",
            "grid": dict(GRID_BLOCK),
            "seed": 5,
            "roi_fraction": 0.9,
        }
        cfg2 = tmp_path / "scalar.json"
        cfg2.write_text(json.dumps(real_cfg))
        out = tmp_path / "out_scalar"
        assert main(["run", "--config", str(cfg2), "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        # per-column reference structure is lost, but the classes stay separable
        assert report["runs"]["10"]["report"]["oa"] >= 0.9

    def test_calibrate_scan_equal_to_white_gives_ones(self, tmp_path):
        cfg = write_config(tmp_path)
        fixtures = tmp_path / "fx"
        main(["synth", "--config", str(cfg), "--out", str(fixtures)])
        listing = json.loads((fixtures / "scans" / "manifest.json").read_text())
        # feed the white cube itself as the only scan
        white_scan = dict(listing["white"])
        white_scan["label"] = "whitescan"
        real_cfg = {
            "input": {"scans": [white_scan], "dark": listing["dark"], "white": listing["white"]},
            "task": "grade",
            "out": str(tmp_path / "out_white"),
        }
        cfg2 = tmp_path / "white.json"
        cfg2.write_text(json.dumps(real_cfg))
        assert main(["calibrate", "--config", str(cfg2)]) == EXIT_OK
        cal = load_cube(
            tmp_path / "out_white" / "calibrated" / "whitescan.hdr",
            tmp_path / "out_white" / "calibrated" / "whitescan.raw",
        )
        np.testing.assert_allclose(cal.data, 1.0, rtol=0, atol=1e-5)


class TestOverrides:
    def test_flag_overrides_config(self, tmp_path):
        cfg = write_config(tmp_path, group_size=[10])
        out = tmp_path / "o1"
        assert (
            main(["run", "--config", str(cfg), "--out", str(out), "--group-size", "5"])
            == EXIT_OK
        )
        report = json.loads((out / "report.json").read_text())
        assert set(report["runs"]) == {"5"}

    def test_invalid_override_rejected(self, tmp_path):
        cfg = write_config(tmp_path)
        code = main(
            ["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--train-fraction", "2.0"]
        )
        assert code == EXIT_CONFIG
