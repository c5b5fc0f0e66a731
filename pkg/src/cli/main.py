# -*- coding: utf-8 -*-
"""
src/cli/main.py

palp-bench command line:

    palp-bench presets
    palp-bench run --preset exp1 --force 25 --seed 7
    palp-bench calibrate --points 3343 --seed 1
    palp-bench track --target 25 --preset exp1 --model models/calibration_model.json
    palp-bench detect --runs 3 --seed 0
    palp-bench metrics --bundle runs/run_exp1_25N_seed7
    palp-bench replay --bundle runs/run_exp1_25N_seed7

Exit codes: 0 success, 2 usage, 3 simulation fault, 4 verification mismatch.
"""

import argparse
import os
import sys
from dataclasses import asdict
from typing import List, Optional

from joblib import Parallel, delayed

from src.calibration.calibrate import (DESK_SCALE_POINTS, MIN_POINTS, calibration_grad_check,
                                       calibration_report, collect_calibration_data, load_model,
                                       new_calibration_model, save_dataset, save_loss_curves,
                                       save_model, train)
from src.calibration.mlp import TrainConfig
from src.contact.contact import ContactConfig
from src.control.protocol import (PROTOCOL_PITCH_MM, ImpedanceParams, ProtocolConfig, SensorSuite,
                                  impedance_force_track, run_protocol)
from src.detection.dataset import BENCHMARK_PRESETS, DetectionConfig, build_detection_dataset
from src.detection.detectors import train_detectors
from src.detection.evaluate import evaluate, format_table, ordering_holds, reports_frame
from src.cli.bundle import (TRACE, RunManifest, force_trace_from_frame, protocol_dict, replay_bundle,
                            run_id_for, write_bundle)
from src.metrics.force_metrics import summarize
from src.metrics.plots import protocol_panel, tracking_panel
from src.phantom.phantom import build_phantom, load_phantom_spec
from src.phantom.presets import (DEFAULT_FORCE, DESCRIPTIONS, SECTIONS, ExperimentId,
                                 parse_experiment_id, preset)
from src.sensors.raw_channels import MixingModel, RawSensor
from src.sensors.tactile import SensorNoiseModel
from src.utils.errors import PalpBenchError, SimulationFault, TraceError, VerificationMismatch
from src.utils.io import MODEL_DIR, ensure_dir, get_logger, output_root, read_csv, set_verbose, write_csv, write_json

logger = get_logger(__name__)

# --- 1. CONSTANTS ---
EXIT_OK, EXIT_USAGE, EXIT_FAULT, EXIT_MISMATCH = 0, 2, 3, 4
FORCE_LEVELS = (25.0, 35.0, 45.0)
DEFAULT_MODEL = os.path.join(MODEL_DIR, "calibration_model.json")


# --- 2. COMMANDS ---

def cmd_presets(args) -> int:
    for pid in ExperimentId:
        spec = preset(pid)
        print(f"{pid.value:<8} {DEFAULT_FORCE[pid]:>4.0f} N  {DESCRIPTIONS[pid]}")
        for t in spec.tendons:
            depth = f"{t.top_depth:g}" if t.end_top_depth is None else f"{t.top_depth:g}->{t.end_top_depth:g}"
            print(f"         tendon {t.start_xy} -> {t.end_xy}, diameter {t.diameter:g} mm, top {depth} mm")
    return EXIT_OK


def _phantom_for(args, pid: ExperimentId):
    spec = load_phantom_spec(args.phantom) if getattr(args, "phantom", None) else preset(pid)
    return build_phantom(spec)


def _protocol_config(args, force: float) -> ProtocolConfig:
    return ProtocolConfig(target_force=force, contact=ContactConfig(pitch=args.pitch))


def _single_run(args, pid: ExperimentId, force: float) -> str:
    phantom = _phantom_for(args, pid)
    cfg = _protocol_config(args, force)
    model = load_model(args.model) if args.model else None
    sensors = SensorSuite.from_seed(args.seed)
    run_id = run_id_for(pid.value, force, args.seed)
    out_dir = os.path.join(args.out or output_root(), run_id)
    manifest = RunManifest(run_id=run_id, preset=pid.value, mode="position", protocol=protocol_dict(cfg),
                           seed=args.seed, noise=asdict(sensors.raw.noise), model_file=args.model)
    title = f"{pid.value}: {DESCRIPTIONS[pid]} ({force:g} N)"
    trace = run_protocol(phantom, cfg, sensors, model)
    return write_bundle(trace, manifest, out_dir, lambda tr, p: protocol_panel(tr, p, title),
                        SECTIONS.get(pid))


def cmd_run(args) -> int:
    pids = [parse_experiment_id(p) for p in args.preset]
    forces = args.force or [None]
    if not args.force_override:
        bad = [f for f in args.force or [] if f not in FORCE_LEVELS]
        if bad:
            raise ValueError(f"force must be one of {FORCE_LEVELS} (use --force-override), got {bad}")
    jobs = [(pid, f if f is not None else DEFAULT_FORCE[pid]) for pid in pids for f in forces]
    for _, f in jobs:
        if not f > 0:
            raise ValueError(f"force must be > 0, got {f}")
    n_jobs = args.jobs if args.batch else 1
    bundles = Parallel(n_jobs=n_jobs)(delayed(_single_run)(args, pid, f) for pid, f in jobs)
    for path in bundles:
        print(path)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    if args.points < MIN_POINTS:
        raise ValueError(f"--points must be >= {MIN_POINTS}")
    phantom = build_phantom(preset(ExperimentId.UNIFORM))
    if args.linear:
        sensor = RawSensor(MixingModel().linear_only(),
                           SensorNoiseModel.noiseless(args.seed, saturation_moment=0.0))
    else:
        sensor = RawSensor(noise=SensorNoiseModel(seed=args.seed))
    logger.info(f"--- Collecting {args.points} calibration points ---")
    data = collect_calibration_data(phantom, args.points, args.seed, sensor)
    cfg = TrainConfig(epochs=args.epochs, learning_rate=args.lr, seed=args.seed)
    model, history = train(new_calibration_model(sensor.n_channels, args.seed), data, cfg)
    grad_error = calibration_grad_check(model, data, seed=args.seed)

    out = args.out or DEFAULT_MODEL
    base = os.path.splitext(out)[0]
    save_model(model, out)
    save_loss_curves(history, f"{base}_loss_curves.csv")
    save_dataset(data, f"{base}_dataset.csv")
    report = calibration_report(model, data, history, grad_error)
    write_json(report, f"{base}_report.json")
    logger.info(f"Split train/test/validation: {report['splits']}")
    logger.info(f"Held-out force RMSE: {report['test_rmse']['force_rmse']:.4f} N "
                f"({report['test_rmse']['force_rmse_pct_range']:.3f}% of range)")
    logger.info(f"Gradient check max relative error: {grad_error:.2e}")
    logger.info(f" SUCCESS: Saved model → {out}")
    return EXIT_OK


def cmd_track(args) -> int:
    pid = parse_experiment_id(args.preset)
    phantom = _phantom_for(args, pid)
    model = None if args.truth else load_model(args.model or DEFAULT_MODEL)
    params = ImpedanceParams(args.stiffness, args.damping, args.integral)
    cfg = _protocol_config(args, args.target)
    sensors = SensorSuite.from_seed(args.seed)
    run_id = run_id_for(pid.value, args.target, args.seed, mode="track")
    out_dir = os.path.join(args.out or output_root(), run_id)
    manifest = RunManifest(run_id=run_id, preset=pid.value, mode="impedance", protocol=protocol_dict(cfg),
                           seed=args.seed, noise=asdict(sensors.raw.noise),
                           model_file=None if args.truth else (args.model or DEFAULT_MODEL),
                           commanded=args.target, impedance=asdict(params))
    title = f"{pid.value}: force tracking at {args.target:g} N"
    try:
        trace = impedance_force_track(phantom, args.target, params, sensors, model, cfg)
    except SimulationFault as exc:
        if exc.trace is not None and len(exc.trace):
            manifest.status = f"aborted: {exc}"
            write_bundle(exc.trace, manifest, out_dir)
        raise
    write_bundle(trace, manifest, out_dir, lambda tr, p: tracking_panel(tr, p, title))
    logger.info(f"Percentage-error RMSE (steps 2-4): {manifest.summary['pct_rmse']:.2f}%")
    print(out_dir)
    return EXIT_OK


def cmd_detect(args) -> int:
    cfg = DetectionConfig(n_jobs=args.jobs)
    model = load_model(args.model) if args.model else None
    samples = build_detection_dataset(args.presets, args.runs, args.seed, cfg, model)
    detectors = train_detectors(samples, args.seed, cfg)
    reports = {d.modality: evaluate(d, detectors.test) for d in detectors.all()}
    table = format_table(reports)
    print(table)
    ok = ordering_holds(reports)
    print(f"\nOrdering F1(image) > F1(sensor) and F1(fused) >= F1(sensor): {'holds' if ok else 'FAILS'}")

    out_dir = ensure_dir(os.path.join(args.out or output_root(), f"detect_seed{args.seed}"))
    write_csv(reports_frame(reports), os.path.join(out_dir, "detection_report.csv"))
    with open(os.path.join(out_dir, "detection_table.txt"), "w") as f:
        f.write(table + "\n")
    write_json({"presets": [parse_experiment_id(p).value for p in args.presets], "runs_per_preset": args.runs,
                "seed": args.seed, "window_length": cfg.window_length, "samples": len(samples),
                "train": len(detectors.train), "test": len(detectors.test), "ordering_holds": ok},
               os.path.join(out_dir, "manifest.txt"))
    logger.info(f" SUCCESS: Saved detection report → {out_dir}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    for bundle in args.bundle:
        manifest = RunManifest.load(bundle)
        force = force_trace_from_frame(read_csv(os.path.join(bundle, TRACE)))
        sections = SECTIONS.get(parse_experiment_id(manifest.preset))
        summary = summarize(force, sections, manifest.commanded)
        print(f"[{manifest.run_id}]")
        for key, value in summary.items():
            print(f"  {key:<32} {value:.6g}")
    return EXIT_OK


def cmd_replay(args) -> int:
    for bundle in args.bundle:
        result = replay_bundle(bundle)
        print(f"{bundle}: {result['compared']} values compared, {result['mismatches']} mismatches")
    return EXIT_OK


# --- 3. PARSER ---

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="palp-bench", description="Desk-scale robotic palpation benchmark")
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("presets", help="list phantom presets").set_defaults(func=cmd_presets)

    run = sub.add_parser("run", help="run the five-step protocol and write a bundle")
    run.add_argument("--preset", nargs="+", required=True)
    run.add_argument("--force", type=float, nargs="+")
    run.add_argument("--force-override", action="store_true")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--phantom", type=str, help="YAML phantom config replacing the preset geometry")
    run.add_argument("--model", type=str, help="calibration model for the measured wrench")
    run.add_argument("--pitch", type=float, default=PROTOCOL_PITCH_MM)
    run.add_argument("--out", type=str)
    run.add_argument("--batch", action="store_true", help="run preset/force combinations in parallel")
    run.add_argument("--jobs", type=int, default=-1)
    run.set_defaults(func=cmd_run)

    cal = sub.add_parser("calibrate", help="collect calibration data and train the wrench MLP")
    cal.add_argument("--points", type=int, default=DESK_SCALE_POINTS)
    cal.add_argument("--seed", type=int, default=0)
    cal.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    cal.add_argument("--lr", type=float, default=TrainConfig.learning_rate)
    cal.add_argument("--linear", action="store_true", help="linear, noise-free, unsaturated mixing")
    cal.add_argument("--out", type=str)
    cal.set_defaults(func=cmd_calibrate)

    trk = sub.add_parser("track", help="closed-loop impedance force tracking")
    trk.add_argument("--target", type=float, default=25.0)
    trk.add_argument("--preset", type=str, default=ExperimentId.EXP1.value)
    trk.add_argument("--model", type=str)
    trk.add_argument("--truth", action="store_true", help="feed back the true force")
    trk.add_argument("--seed", type=int, default=0)
    trk.add_argument("--stiffness", type=float, default=ImpedanceParams.stiffness)
    trk.add_argument("--damping", type=float, default=ImpedanceParams.damping)
    trk.add_argument("--integral", type=float, default=ImpedanceParams.integral)
    trk.add_argument("--phantom", type=str)
    trk.add_argument("--pitch", type=float, default=PROTOCOL_PITCH_MM)
    trk.add_argument("--out", type=str)
    trk.set_defaults(func=cmd_track)

    det = sub.add_parser("detect", help="tendon detection benchmark across modalities")
    det.add_argument("--presets", nargs="+", default=[p.value for p in BENCHMARK_PRESETS])
    det.add_argument("--runs", type=int, default=3)
    det.add_argument("--seed", type=int, default=0)
    det.add_argument("--model", type=str)
    det.add_argument("--jobs", type=int, default=1)
    det.add_argument("--out", type=str)
    det.set_defaults(func=cmd_detect)

    met = sub.add_parser("metrics", help="recompute summary metrics of stored bundles")
    met.add_argument("--bundle", nargs="+", required=True)
    met.set_defaults(func=cmd_metrics)

    rep = sub.add_parser("replay", help="verify stored metrics against the stored trace")
    rep.add_argument("--bundle", nargs="+", required=True)
    rep.set_defaults(func=cmd_replay)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    set_verbose(args.verbose)
    try:
        return args.func(args)
    except VerificationMismatch as exc:
        logger.error(f" Verification failed: {exc}")
        return EXIT_MISMATCH
    except (SimulationFault, TraceError) as exc:
        logger.error(f" Simulation fault: {exc}")
        return EXIT_FAULT
    except ValueError as exc:
        logger.error(f" Usage error: {exc}")
        return EXIT_USAGE
    except (PalpBenchError, OSError) as exc:
        logger.error(f" Error: {exc}")
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
