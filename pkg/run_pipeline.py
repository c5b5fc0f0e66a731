# -*- coding: utf-8 -*-
"""
run_pipeline.py
Runs the desk-scale benchmark end to end: calibration, the four experiment
protocols, force tracking, detection, and a replay check of every bundle.
"""

import glob
import os
import subprocess
import sys

from src.utils.io import output_root


def run_step(label, args):
    print(f"\n--- Running: {label} ---")
    result = subprocess.run([sys.executable, "-m", "src.cli.main", *args], capture_output=False)
    if result.returncode != 0:
        print(f" Error in {label} (exit code {result.returncode}). Pipeline stopped.")
        sys.exit(result.returncode)
    print(f" Finished: {label}")


# 1. Calibration (3343 points, 70/20/10 split)
run_step("calibration", ["calibrate", "--points", "3343", "--seed", "1"])

# 2. Palpation protocol on every experiment at its nominal force
for preset in ("exp1", "exp2", "exp3", "exp4", "uniform"):
    run_step(f"protocol {preset}", ["run", "--preset", preset, "--seed", "0",
                                    "--model", os.path.join("models", "calibration_model.json")])

# 3. Closed-loop force tracking at 25 N
run_step("force tracking", ["track", "--target", "25", "--preset", "exp1"])

# 4. Tendon detection across modalities
run_step("detection", ["detect", "--runs", "3", "--seed", "0"])

# 5. Replay every bundle against its stored metrics
bundles = sorted(d for d in glob.glob(os.path.join(output_root(), "*"))
                 if os.path.exists(os.path.join(d, "metrics.csv")))
run_step("replay", ["replay", "--bundle", *bundles])

print("\nFULL BENCHMARK COMPLETE. Bundles are in", output_root())
