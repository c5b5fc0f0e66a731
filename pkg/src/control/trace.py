# -*- coding: utf-8 -*-
"""
src/control/trace.py
Step labels and the per-tick protocol trace, with its CSV form.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from src.contact.contact import COMPONENTS
from src.sensors.tactile import TactileImage
from src.utils.errors import TraceError

TRUE_COLUMNS = [f"{c}_true" for c in COMPONENTS]
MEAS_COLUMNS = [f"{c}_meas" for c in COMPONENTS]


class StepLabel(IntEnum):
    DESCEND = 1
    DWELL = 2
    PLOUGH = 3
    HOLD = 4
    RETRACT = 5


def validate_steps(steps: np.ndarray) -> None:
    """Labels must be valid and appear in order 1 -> 5 without going back."""
    steps = np.asarray(steps, dtype=int)
    if steps.size == 0:
        raise TraceError("trace has no samples")
    if steps.min() < StepLabel.DESCEND or steps.max() > StepLabel.RETRACT:
        raise TraceError(f"invalid step label in {sorted(set(steps.tolist()))}")
    if np.any(np.diff(steps) < 0):
        raise TraceError("step labels go backwards")
    if np.any(np.diff(steps) > 1):
        raise TraceError("step labels skip a step")


def validate_times(t: np.ndarray) -> None:
    if np.any(np.diff(np.asarray(t, dtype=float)) <= 0):
        raise TraceError("timestamps must be strictly increasing")


@dataclass
class ProtocolTrace:
    t: np.ndarray
    pose: np.ndarray           # (n, 3) x, y, z in mm
    true: np.ndarray           # (n, 6)
    meas: np.ndarray           # (n, 6)
    raw: np.ndarray            # (n, C)
    frame_idx: np.ndarray      # (n,) most recent frame, -1 before the first
    step: np.ndarray           # (n,)
    frames: List[TactileImage] = field(default_factory=list)
    commanded: Optional[float] = None
    mode: str = "position"
    meta: Dict[str, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    def validate(self) -> None:
        validate_times(self.t)
        validate_steps(self.step)

    def mask(self, *steps: int) -> np.ndarray:
        return np.isin(self.step, [int(s) for s in steps])

    def duration(self, step: int) -> float:
        """Time between the last tick before the step and the step's last tick."""
        idx = np.flatnonzero(self.step == int(step))
        if idx.size == 0:
            return 0.0
        start = self.t[idx[0] - 1] if idx[0] > 0 else self.t[idx[0]]
        return float(self.t[idx[-1]] - start)

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame({"t": self.t, "x": self.pose[:, 0], "y": self.pose[:, 1], "z": self.pose[:, 2]})
        for j, name in enumerate(TRUE_COLUMNS):
            df[name] = self.true[:, j]
        for j, name in enumerate(MEAS_COLUMNS):
            df[name] = self.meas[:, j]
        for j in range(self.raw.shape[1]):
            df[f"c{j}"] = self.raw[:, j]
        df["frame_idx"] = self.frame_idx.astype(int)
        df["step"] = self.step.astype(int)
        return df

    @classmethod
    def from_frame(cls, df: pd.DataFrame, commanded: Optional[float] = None,
                   mode: str = "position") -> "ProtocolTrace":
        missing = [c for c in ["t", "x", "y", "z", "frame_idx", "step", *TRUE_COLUMNS, *MEAS_COLUMNS]
                   if c not in df.columns]
        if missing:
            raise TraceError(f"trace CSV lacks columns {missing}")
        raw_cols = sorted((c for c in df.columns if c.startswith("c") and c[1:].isdigit()),
                          key=lambda c: int(c[1:]))
        return cls(t=df["t"].to_numpy(float), pose=df[["x", "y", "z"]].to_numpy(float),
                   true=df[TRUE_COLUMNS].to_numpy(float), meas=df[MEAS_COLUMNS].to_numpy(float),
                   raw=df[raw_cols].to_numpy(float), frame_idx=df["frame_idx"].to_numpy(int),
                   step=df["step"].to_numpy(int), commanded=commanded, mode=mode)
