# -*- coding: utf-8 -*-
"""
src/detection/dataset.py
Labelled tendon / no-tendon samples cut from step-3 sweeps of protocol runs.

Each sample pairs the tactile frame taken at a sweep position with the F/T window
ending at that tick and the run's step-2 benchmark force. The label is geometric
ground truth: tendon coverage of a small disc at the tool centre above one half.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from src.calibration.mlp import MLPModel
from src.control.protocol import ProtocolConfig, SensorSuite, run_protocol
from src.control.trace import ProtocolTrace, StepLabel
from src.metrics.force_metrics import ForceTrace, f_bench
from src.phantom.phantom import build_phantom
from src.phantom.presets import DEFAULT_FORCE, ExperimentId, parse_experiment_id, preset
from src.utils.io import get_logger

logger = get_logger(__name__)

# --- 1. CONFIGURATION ---
BENCHMARK_PRESETS = (ExperimentId.EXP1, ExperimentId.EXP2, ExperimentId.EXP3, ExperimentId.EXP4)
BENCHMARK_SEEDS = (0, 1, 2)


@dataclass(frozen=True)
class DetectionConfig:
    sample_spacing: float = 4.0          # mm along the sweep
    window_length: int = 45              # F/T ticks (0.15 s)
    label_radius: float = 1.5            # mm
    label_threshold: float = 0.5
    head_widths: Tuple[int, ...] = (16,)
    epochs: int = 300
    learning_rate: float = 0.01
    batch_size: int = 32
    test_size: float = 0.2
    fusion_weights: Tuple[float, float] = (0.5, 0.5)   # image, sensor
    n_jobs: int = 1

    def __post_init__(self):
        if not self.sample_spacing > 0 or self.window_length < 2:
            raise ValueError("sample_spacing must be > 0 and window_length >= 2")
        if not 0 < self.test_size < 1:
            raise ValueError("test_size must lie in (0, 1)")
        if min(self.fusion_weights) < 0 or sum(self.fusion_weights) <= 0:
            raise ValueError("fusion weights must be non-negative with a positive sum")


@dataclass
class LabeledSample:
    image: np.ndarray
    window: np.ndarray        # (window_length, 6)
    label: int                # 1 tendon, 0 no tendon
    preset: str
    y: float
    run: int
    f_bench: Optional[float] = None    # run benchmark Fz; deviation features fall back to the window mean


# --- 2. EXTRACTION ---

def samples_from_trace(trace: ProtocolTrace, phantom, preset_id: str, run: int,
                       cfg: DetectionConfig) -> List[LabeledSample]:
    """Frame ticks of step 3 at least `sample_spacing` apart, each with a full F/T window."""
    if not trace.frames:
        raise ValueError("trace has no tactile frames")
    bench = f_bench(ForceTrace.from_protocol(trace))
    samples = []
    last_y = -np.inf
    for i in np.flatnonzero(trace.step == StepLabel.PLOUGH):
        fidx = trace.frame_idx[i]
        if i < cfg.window_length - 1 or fidx < 0 or trace.frames[fidx].t != trace.t[i]:
            continue
        x, y = trace.pose[i, 0], trace.pose[i, 1]
        if y - last_y < cfg.sample_spacing - 1e-9:
            continue
        last_y = y
        coverage = phantom.tendon_coverage(x, y, cfg.label_radius)
        samples.append(LabeledSample(
            image=trace.frames[fidx].intensities,
            window=trace.meas[i - cfg.window_length + 1:i + 1].copy(),
            label=int(coverage > cfg.label_threshold),
            preset=preset_id, y=float(y), run=run, f_bench=bench))
    return samples


def _run_samples(preset_id: ExperimentId, seed: int, cfg: DetectionConfig,
                 model: Optional[MLPModel]) -> List[LabeledSample]:
    phantom = build_phantom(preset(preset_id))
    protocol = ProtocolConfig(target_force=DEFAULT_FORCE[preset_id])
    trace = run_protocol(phantom, protocol, SensorSuite.from_seed(seed), model)
    return samples_from_trace(trace, phantom, preset_id.value, seed, cfg)


def balance(samples: Sequence[LabeledSample], seed: int) -> List[LabeledSample]:
    """Subsamples the majority class to the minority count, keeping original order."""
    labels = np.array([s.label for s in samples])
    pos, neg = np.flatnonzero(labels == 1), np.flatnonzero(labels == 0)
    if pos.size == 0 or neg.size == 0:
        raise ValueError(f"dataset is single-class ({pos.size} tendon, {neg.size} no-tendon samples)")
    rng = np.random.default_rng(seed)
    n = min(pos.size, neg.size)
    keep = np.sort(np.concatenate([rng.choice(pos, n, replace=False), rng.choice(neg, n, replace=False)]))
    return [samples[i] for i in keep]


def build_detection_dataset(presets: Sequence = BENCHMARK_PRESETS, runs_per_preset: int = len(BENCHMARK_SEEDS),
                            seed: int = 0, cfg: Optional[DetectionConfig] = None,
                            model: Optional[MLPModel] = None) -> List[LabeledSample]:
    cfg = cfg or DetectionConfig()
    ids = [parse_experiment_id(p) for p in presets]
    if not ids or runs_per_preset < 1:
        raise ValueError("need at least one preset and one run per preset")
    jobs = [(pid, seed * 1000 + r) for pid in ids for r in range(runs_per_preset)]
    logger.info(f"--- Building detection dataset: {len(ids)} presets x {runs_per_preset} runs ---")
    per_run = Parallel(n_jobs=cfg.n_jobs)(delayed(_run_samples)(pid, s, cfg, model) for pid, s in jobs)
    samples = [s for run in per_run for s in run]
    balanced = balance(samples, seed)
    logger.info(f"   {len(samples)} samples extracted, {len(balanced)} kept after balancing")
    return balanced
