# -*- coding: utf-8 -*-
import json
import os
import shutil

import pandas as pd
import pytest

from src.calibration.calibrate import load_model
from src.cli.bundle import FRAMES, MANIFEST, METRICS, PLOT, TRACE, RunManifest
from src.cli.main import EXIT_FAULT, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, main
from src.utils.io import read_pgm, write_csv

RUN_ARGS = ["run", "--preset", "uniform", "--force", "25", "--seed", "3"]


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs")
    assert main(RUN_ARGS + ["--out", str(out)]) == EXIT_OK
    return str(out / "run_uniform_25N_seed3")


def test_presets_listing(capsys):
    assert main(["presets"]) == EXIT_OK
    listing = capsys.readouterr().out
    for pid in ("exp1", "exp2", "exp3", "exp4", "uniform"):
        assert pid in listing


@pytest.mark.parametrize("argv", [
    ["calibrate", "--points", "50"],
    ["run", "--preset", "exp1", "--force", "30"],
    ["run", "--preset", "exp9"],
    ["run", "--preset", "exp1", "--force", "-5", "--force-override"],
])
def test_usage_errors_exit_2(argv, tmp_path):
    assert main(argv + (["--out", str(tmp_path)] if argv[0] == "run" else [])) == EXIT_USAGE


def test_bundle_layout(bundle):
    for name in (MANIFEST, TRACE, METRICS, PLOT):
        assert os.path.isfile(os.path.join(bundle, name))
    manifest = RunManifest.load(bundle)
    assert manifest.run_id == "run_uniform_25N_seed3"
    assert manifest.status == "ok" and manifest.seed == 3
    assert set(manifest.artifacts) == {TRACE, METRICS, FRAMES, PLOT}
    assert manifest.summary["f_bench"] >= 25.0

    trace = pd.read_csv(os.path.join(bundle, TRACE))
    assert list(trace.columns[:4]) == ["t", "x", "y", "z"]
    assert trace.columns[-1] == "step" and "c11" in trace.columns
    assert len(trace) == manifest.rows

    frames = sorted(os.listdir(os.path.join(bundle, FRAMES)))
    assert frames[0] == "0000.pgm"
    assert len(frames) == trace["frame_idx"].max() + 1
    assert read_pgm(os.path.join(bundle, FRAMES, frames[0])).shape == (64, 64)


def test_replay_and_metrics_succeed(bundle, capsys):
    assert main(["replay", "--bundle", bundle]) == EXIT_OK
    assert "0 mismatches" in capsys.readouterr().out
    assert main(["metrics", "--bundle", bundle]) == EXIT_OK
    assert "f_bench" in capsys.readouterr().out


def test_rerun_is_byte_identical(bundle, out_dir):
    assert main(RUN_ARGS) == EXIT_OK
    rerun = os.path.join(str(out_dir), "run_uniform_25N_seed3")
    for name in (TRACE, METRICS, PLOT):
        with open(os.path.join(bundle, name), "rb") as a, open(os.path.join(rerun, name), "rb") as b:
            assert a.read() == b.read(), name


def test_tampered_metrics_fail_replay(bundle, tmp_path):
    copy = shutil.copytree(bundle, tmp_path / "tampered")
    metrics = pd.read_csv(copy / METRICS, float_precision="round_trip")
    metrics.loc[10, "value"] += 1e-9
    write_csv(metrics, str(copy / METRICS))
    assert main(["replay", "--bundle", str(copy)]) == EXIT_MISMATCH


def test_missing_artifact_fails_replay(bundle, tmp_path):
    copy = shutil.copytree(bundle, tmp_path / "incomplete")
    os.remove(copy / PLOT)
    assert main(["replay", "--bundle", str(copy)]) == EXIT_MISMATCH


def test_replay_of_missing_bundle_is_a_fault(tmp_path):
    assert main(["replay", "--bundle", str(tmp_path / "nothing")]) == EXIT_FAULT


def test_track_with_truth_feedback(tmp_path):
    argv = ["track", "--target", "25", "--preset", "uniform", "--truth", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    manifest = RunManifest.load(str(tmp_path / "track_uniform_25N_seed0"))
    assert manifest.mode == "impedance" and manifest.commanded == 25.0
    assert 0.0 < manifest.summary["pct_rmse"] < 12.0


def test_unstable_track_leaves_aborted_bundle(tmp_path):
    argv = ["track", "--target", "25", "--preset", "uniform", "--truth", "--stiffness", "0.01",
            "--out", str(tmp_path)]
    assert main(argv) == EXIT_FAULT
    manifest = RunManifest.load(str(tmp_path / "track_uniform_25N_seed0"))
    assert manifest.status.startswith("aborted")


def _read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def test_calibrate_writes_model_and_repeats_exactly(tmp_path):
    outputs = []
    for name in ("a", "b"):
        model = tmp_path / name / "model.json"
        argv = ["calibrate", "--points", "100", "--epochs", "2", "--seed", "5", "--out", str(model)]
        assert main(argv) == EXIT_OK
        outputs.append(model)
    for suffix in ("model.json", "model_report.json", "model_loss_curves.csv", "model_dataset.csv"):
        first, second = (str(p.parent / suffix) for p in outputs)
        assert _read_bytes(first) == _read_bytes(second), suffix
    report = json.loads((tmp_path / "a" / "model_report.json").read_text())
    assert report["points"] == 100 and report["epochs"] == 2
    assert load_model(str(outputs[0])).widths[0] == 12


def test_detect_writes_report_and_repeats_exactly(tmp_path, capsys):
    argv = ["detect", "--presets", "exp1", "--runs", "1", "--seed", "2"]
    for name in ("a", "b"):
        assert main(argv + ["--out", str(tmp_path / name)]) == EXIT_OK
    assert "Combined (Late Fusion)" in capsys.readouterr().out
    for name in ("detection_report.csv", "detection_table.txt", "manifest.txt"):
        a = _read_bytes(str(tmp_path / "a" / "detect_seed2" / name))
        assert a == _read_bytes(str(tmp_path / "b" / "detect_seed2" / name)), name
    manifest = json.loads((tmp_path / "a" / "detect_seed2" / "manifest.txt").read_text())
    assert manifest["presets"] == ["exp1"] and manifest["samples"] > 0


@pytest.mark.slow
def test_calibrated_track_bundle_replays(tmp_path, capsys):
    model = str(tmp_path / "model.json")
    assert main(["calibrate", "--seed", "1", "--epochs", "100", "--out", model]) == EXIT_OK
    argv = ["track", "--target", "25", "--preset", "exp1", "--model", model, "--seed", "1",
            "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    bundle = str(tmp_path / "track_exp1_25N_seed1")
    manifest = RunManifest.load(bundle)
    assert manifest.model_file == model and manifest.status == "ok"
    assert main(["replay", "--bundle", bundle]) == EXIT_OK
    assert "0 mismatches" in capsys.readouterr().out
