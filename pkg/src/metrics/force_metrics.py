# -*- coding: utf-8 -*-
"""
src/metrics/force_metrics.py

Normal-force analysis of a protocol trace:

    F_bench        mean Fz over the first hold (step 2)
    rel(t)       = (Fz(t) - F_bench) / F_bench
    abs(t)       = |Fz(t) - F_bench|,   neg_abs(t) = -abs(t)   (plotted, shaded)
    pct_rmse     = 100 * sqrt(mean(((Fz - F_cmd) / F_cmd)^2)) over a step window

Fz is magnitude-positive here; plots apply the display sign.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.control.trace import ProtocolTrace, StepLabel, validate_steps, validate_times
from src.utils.errors import TraceError

# --- 1. TYPES ---
DEFAULT_RMSE_WINDOW = (StepLabel.DWELL, StepLabel.PLOUGH, StepLabel.HOLD)
REFERENCE_TRACKING_PCT_RMSE = 7.04


@dataclass
class ForceTrace:
    t: np.ndarray
    fz: np.ndarray
    step: np.ndarray
    y: Optional[np.ndarray] = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.fz = np.asarray(self.fz, dtype=float)
        self.step = np.asarray(self.step, dtype=int)
        if not (len(self.t) == len(self.fz) == len(self.step)):
            raise TraceError("t, Fz and step must have the same length")
        validate_times(self.t)
        validate_steps(self.step)

    @classmethod
    def from_protocol(cls, trace: ProtocolTrace, source: str = "meas") -> "ForceTrace":
        if source not in ("meas", "true"):
            raise ValueError(f"source must be 'meas' or 'true', got '{source}'")
        wrench = trace.meas if source == "meas" else trace.true
        return cls(trace.t, wrench[:, 2], trace.step, trace.pose[:, 1])


@dataclass
class MetricSeries:
    t: np.ndarray
    values: np.ndarray
    kind: str     # rel / abs / neg_abs

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t, "value": self.values, "kind": self.kind})


# --- 2. DEVIATION METRICS ---

def f_bench(trace: ForceTrace) -> float:
    mask = trace.step == StepLabel.DWELL
    if not np.any(mask):
        raise TraceError("trace has no step-2 (first hold) samples")
    return float(np.mean(trace.fz[mask]))


def rel_change(trace: ForceTrace, bench: float) -> MetricSeries:
    if bench == 0:
        raise ValueError("benchmark force must be non-zero")
    return MetricSeries(trace.t.copy(), (trace.fz - bench) / bench, "rel")


def abs_dev(trace: ForceTrace, bench: float) -> Tuple[MetricSeries, MetricSeries]:
    dev = np.abs(trace.fz - bench)
    return MetricSeries(trace.t.copy(), dev, "abs"), MetricSeries(trace.t.copy(), -dev, "neg_abs")


def pct_rmse(measured: ForceTrace, commanded: float,
             window: Iterable[int] = DEFAULT_RMSE_WINDOW) -> float:
    if commanded == 0:
        raise ValueError("commanded force must be non-zero")
    mask = np.isin(measured.step, [int(s) for s in window])
    if not np.any(mask):
        raise TraceError(f"no samples in step window {sorted(int(s) for s in window)}")
    err = (measured.fz[mask] - commanded) / commanded
    return float(100.0 * np.sqrt(np.mean(err ** 2)))


# --- 3. SECTION SUMMARIES ---

def section_mask(trace: ForceTrace, y_window: Sequence[float], step: int = StepLabel.PLOUGH) -> np.ndarray:
    if trace.y is None:
        raise TraceError("trace carries no Y positions")
    lo, hi = y_window
    return (trace.step == int(step)) & (trace.y >= lo) & (trace.y <= hi)


def section_mean(trace: ForceTrace, series: MetricSeries, y_window: Sequence[float]) -> float:
    mask = section_mask(trace, y_window)
    if not np.any(mask):
        raise TraceError(f"no step-3 samples with y in {tuple(y_window)}")
    return float(np.mean(series.values[mask]))


def all_series(trace: ForceTrace) -> Tuple[float, MetricSeries, MetricSeries, MetricSeries]:
    bench = f_bench(trace)
    rel = rel_change(trace, bench)
    dev, neg = abs_dev(trace, bench)
    return bench, rel, dev, neg


def metrics_frame(trace: ForceTrace) -> pd.DataFrame:
    """Long-format (t, value, kind) table of every series."""
    _, rel, dev, neg = all_series(trace)
    return pd.concat([s.to_frame() for s in (rel, dev, neg)], ignore_index=True)


def summarize(trace: ForceTrace, sections: Optional[Dict[str, Tuple[float, float]]] = None,
              commanded: Optional[float] = None) -> Dict[str, float]:
    bench, rel, dev, _ = all_series(trace)
    plough = trace.step == StepLabel.PLOUGH
    summary = {
        "f_bench": bench,
        "plough_mean_rel": float(np.mean(rel.values[plough])) if np.any(plough) else float("nan"),
        "plough_max_abs": float(np.max(dev.values[plough])) if np.any(plough) else float("nan"),
    }
    for name, window in (sections or {}).items():
        summary[f"section_{name}_mean_rel"] = section_mean(trace, rel, window)
    if commanded is not None:
        summary["pct_rmse"] = pct_rmse(trace, commanded)
    return summary
