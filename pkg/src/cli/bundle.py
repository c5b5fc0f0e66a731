# -*- coding: utf-8 -*-
"""
src/cli/bundle.py

Run bundles: one directory per run with fixed file names

    manifest.txt      JSON run manifest
    trace.csv         per-tick trace
    metrics.csv       rel / abs / neg_abs series (t, value, kind)
    frames/NNNN.pgm   tactile frames
    plot.svg          figure panel

Metrics are always computed from the re-read trace CSV, so a replay of the stored
trace reproduces them bit for bit.
"""

import os
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from src.control.protocol import ProtocolConfig
from src.control.trace import ProtocolTrace
from src.metrics.force_metrics import ForceTrace, metrics_frame, summarize
from src.sensors.stream import SENSOR_RATE_HZ
from src.utils.errors import TraceError, VerificationMismatch
from src.utils.io import TOOL_VERSION, ensure_dir, get_logger, read_csv, read_json, write_csv, write_json, write_pgm

logger = get_logger(__name__)

MANIFEST = "manifest.txt"
TRACE = "trace.csv"
METRICS = "metrics.csv"
FRAMES = "frames"
PLOT = "plot.svg"
SEED_SCHEME = "tactile rng = default_rng([seed, 1]); raw channel rng = default_rng([seed, 2])"


# --- 1. MANIFEST ---

@dataclass
class RunManifest:
    run_id: str
    preset: str
    mode: str
    protocol: dict
    seed: int
    noise: dict = field(default_factory=dict)
    model_file: Optional[str] = None
    commanded: Optional[float] = None
    impedance: Optional[dict] = None
    artifacts: List[str] = field(default_factory=list)
    summary: Dict[str, float] = field(default_factory=dict)
    duration: float = 0.0
    rows: int = 0
    status: str = "ok"
    seed_scheme: str = SEED_SCHEME
    tool_version: str = TOOL_VERSION

    @classmethod
    def load(cls, bundle_dir: str) -> "RunManifest":
        path = os.path.join(bundle_dir, MANIFEST)
        if not os.path.exists(path):
            raise FileNotFoundError(f"No manifest in {bundle_dir}")
        return cls(**read_json(path))


def protocol_dict(cfg: ProtocolConfig) -> dict:
    return asdict(cfg)


def run_id_for(preset: str, force: float, seed: int, mode: str = "run") -> str:
    return f"{mode}_{preset}_{force:g}N_seed{seed}"


# --- 2. WRITING ---

def force_trace_from_frame(df: pd.DataFrame, source: str = "meas") -> ForceTrace:
    return ForceTrace(df["t"].to_numpy(float), df[f"Fz_{source}"].to_numpy(float),
                      df["step"].to_numpy(int), df["y"].to_numpy(float))


def write_bundle(trace: ProtocolTrace, manifest: RunManifest, out_dir: str,
                 plot: Optional[Callable[[ProtocolTrace, str], str]] = None,
                 sections: Optional[dict] = None) -> str:
    ensure_dir(out_dir)
    frames_dir = ensure_dir(os.path.join(out_dir, FRAMES))
    trace_path = write_csv(trace.to_frame(), os.path.join(out_dir, TRACE))

    stored = read_csv(trace_path)
    force = force_trace_from_frame(stored)
    artifacts = [TRACE]
    if np.any(force.step == 2):
        write_csv(metrics_frame(force), os.path.join(out_dir, METRICS))
        artifacts.append(METRICS)
        manifest.summary = summarize(force, sections, manifest.commanded)

    for i, frame in enumerate(trace.frames):
        write_pgm(frame.intensities, os.path.join(frames_dir, f"{i:04d}.pgm"))
    artifacts.append(FRAMES)
    if plot is not None and METRICS in artifacts:
        plot(trace, os.path.join(out_dir, PLOT))
        artifacts.append(PLOT)

    manifest.artifacts = artifacts
    manifest.rows = len(trace)
    manifest.duration = float(trace.t[-1] - trace.t[0]) if len(trace) else 0.0
    write_json(asdict(manifest), os.path.join(out_dir, MANIFEST))
    logger.info(f" SUCCESS: Saved bundle → {out_dir}")
    return out_dir


# --- 3. REPLAY ---

def recompute_metrics(bundle_dir: str) -> pd.DataFrame:
    return metrics_frame(force_trace_from_frame(read_csv(os.path.join(bundle_dir, TRACE))))


def replay_bundle(bundle_dir: str) -> Dict[str, int]:
    """Recomputes metrics from the stored trace and compares them to the stored ones.

    Returns the comparison counts; raises VerificationMismatch on any difference.
    """
    manifest = RunManifest.load(bundle_dir)
    missing = [a for a in manifest.artifacts if not os.path.exists(os.path.join(bundle_dir, a))]
    if missing:
        raise VerificationMismatch(f"{bundle_dir}: missing artifacts {missing}")

    trace_df = read_csv(os.path.join(bundle_dir, TRACE))
    expected_rows = manifest.duration * SENSOR_RATE_HZ + 1
    if abs(len(trace_df) - expected_rows) > 1:
        raise VerificationMismatch(f"{bundle_dir}: {len(trace_df)} trace rows, manifest implies {expected_rows:.0f}")
    if METRICS not in manifest.artifacts:
        raise TraceError(f"{bundle_dir}: bundle has no stored metrics to verify")

    stored = read_csv(os.path.join(bundle_dir, METRICS))
    fresh = recompute_metrics(bundle_dir)
    if list(stored.columns) != list(fresh.columns) or len(stored) != len(fresh):
        raise VerificationMismatch(f"{bundle_dir}: metric table shape differs "
                                   f"({stored.shape} stored vs {fresh.shape} recomputed)")
    mismatches = int(np.sum(stored["kind"].to_numpy() != fresh["kind"].to_numpy()))
    for col in ("t", "value"):
        a, b = stored[col].to_numpy(float), fresh[col].to_numpy(float)
        mismatches += int(np.sum(a.view(np.uint64) != b.view(np.uint64)))
    if mismatches:
        raise VerificationMismatch(f"{bundle_dir}: {mismatches} metric values differ from the stored trace")
    return {"compared": int(len(fresh) * 3), "mismatches": 0}
