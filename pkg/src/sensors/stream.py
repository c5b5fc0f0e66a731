# -*- coding: utf-8 -*-
"""
src/sensors/stream.py
Resamples a control-rate trajectory to the 300 Hz F/T stream (linear
interpolation of the wrench between ticks) and emits tactile frames at a lower
rate through an optional frame source.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.contact.contact import ToolPose, Wrench
from src.sensors.raw_channels import RawSensor
from src.sensors.tactile import TactileImage
from src.utils.errors import TraceError

SENSOR_RATE_HZ = 300.0
FRAME_RATE_HZ = 30.0


@dataclass
class SensorStream:
    times: np.ndarray
    wrenches: np.ndarray       # (n, 6) interpolated truth
    raw: np.ndarray            # (n, C)
    frames: List[TactileImage] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.raw, columns=[f"c{i}" for i in range(self.raw.shape[1])])
        df.insert(0, "t", self.times)
        return df


def sample_times(t0: float, t1: float, rate: float) -> np.ndarray:
    """Inclusive-endpoint sample grid t0 + k / rate."""
    n = int(np.floor((t1 - t0) * rate + 1e-9))
    return t0 + np.arange(n + 1) / rate


def stream(trajectory: Sequence[Tuple[ToolPose, Wrench]], sensor: RawSensor,
           rate: float = SENSOR_RATE_HZ,
           frame_source: Optional[Callable[[ToolPose], TactileImage]] = None,
           frame_rate: float = FRAME_RATE_HZ) -> SensorStream:
    if len(trajectory) < 2:
        raise TraceError("trajectory needs at least two samples")
    t = np.array([pose.t for pose, _ in trajectory])
    if np.any(np.diff(t) <= 0):
        raise TraceError("trajectory timestamps must be strictly increasing")

    times = sample_times(t[0], t[-1], rate)
    truth = np.array([w.as_array() for _, w in trajectory])
    wrenches = np.column_stack([np.interp(times, t, truth[:, j]) for j in range(6)])
    raw = np.array([sensor.read(Wrench.from_array(w, t=ti)).channels
                    for ti, w in zip(times, wrenches)])

    frames = []
    if frame_source is not None:
        xyz = np.array([(p.x, p.y, p.z) for p, _ in trajectory])
        for tf in sample_times(t[0], t[-1], frame_rate):
            x, y, z = (np.interp(tf, t, xyz[:, j]) for j in range(3))
            frames.append(frame_source(ToolPose(float(x), float(y), float(z), t=float(tf))))
    return SensorStream(times, wrenches, raw, frames)
