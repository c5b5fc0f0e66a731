# -*- coding: utf-8 -*-
"""
src/control/protocol.py

Five-step palpation protocol and closed-loop impedance force tracking against a
simulated phantom, one control tick at a time (300 Hz, matching the F/T stream).

    1 descend along -Z until the measured normal force reaches the target
    2 hold the pose for `dwell` seconds
    3 translate `travel` mm along +Y (position control: z fixed, force varies)
    4 hold again
    5 retract to the start height

A boundary tick (the one on which a step's exit condition is met) belongs to the
earlier step. Time is k * tick from an integer counter, so it never accumulates
rounding error.
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from src.calibration.calibrate import predict
from src.calibration.mlp import MLPModel
from src.contact.contact import ContactConfig, ToolPose, Wrench, simulate_contact
from src.control.trace import ProtocolTrace, StepLabel
from src.phantom.phantom import Phantom
from src.sensors.raw_channels import MixingModel, RawSensor
from src.sensors.stream import FRAME_RATE_HZ, SENSOR_RATE_HZ
from src.sensors.tactile import SensorNoiseModel, TactileCamera, TactileConfig
from src.utils.errors import SimulationFault
from src.utils.io import get_logger

logger = get_logger(__name__)

# --- 1. CONFIGURATION ---
PROTOCOL_PITCH_MM = 1.0
DISENGAGE_FORCE_N = 0.1
INSTABILITY_FACTOR = 3.0


@dataclass(frozen=True)
class ProtocolConfig:
    target_force: float = 25.0       # N
    dwell: float = 1.0               # s
    travel: float = 120.0            # mm along +Y
    descent_speed: float = 2.0       # mm/s
    sweep_speed: float = 20.0        # mm/s
    retract_speed: float = 10.0      # mm/s
    tick: float = 1.0 / SENSOR_RATE_HZ
    start_xy: Tuple[float, float] = (0.0, -60.0)
    start_height: float = 1.0        # mm above the surface
    frame_rate: float = FRAME_RATE_HZ
    contact: ContactConfig = field(default_factory=lambda: ContactConfig(pitch=PROTOCOL_PITCH_MM))

    def __post_init__(self):
        for name in ("target_force", "dwell", "travel", "descent_speed", "sweep_speed",
                     "retract_speed", "tick", "frame_rate"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.start_height > 0:
            raise ValueError("start pose must be above the phantom (start_height > 0)")

    @property
    def dwell_ticks(self) -> int:
        return int(round(self.dwell / self.tick))

    @property
    def sweep_ticks(self) -> int:
        return max(1, int(round(self.travel / self.sweep_speed / self.tick)))

    @property
    def frame_every(self) -> int:
        return max(1, int(round(1.0 / (self.frame_rate * self.tick))))


@dataclass(frozen=True)
class ImpedanceParams:
    stiffness: float = 50.0     # N per mm of z correction
    damping: float = 0.02       # N*s/mm
    integral: float = 0.0       # N per (mm*s)

    def __post_init__(self):
        for name in ("stiffness", "damping", "integral"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} gain must be >= 0")


@dataclass
class SensorSuite:
    """Per-run sensor instances; both generators derive from one run seed."""
    raw: RawSensor
    camera: Optional[TactileCamera] = None

    @classmethod
    def from_seed(cls, seed: int, noise: Optional[SensorNoiseModel] = None,
                  mixing: Optional[MixingModel] = None, tactile: Optional[TactileConfig] = None,
                  frames: bool = True) -> "SensorSuite":
        if noise is None:
            noise = SensorNoiseModel(seed=seed)
        camera = TactileCamera(noise, tactile) if frames else None
        return cls(RawSensor(mixing, noise), camera)


# --- 2. TICK RECORDER ---

class _Recorder:
    """Evaluates contact, sensors and estimate for one tick and appends the sample."""

    def __init__(self, phantom: Phantom, cfg: ProtocolConfig, sensors: SensorSuite,
                 model: Optional[MLPModel]):
        self.phantom, self.cfg, self.sensors, self.model = phantom, cfg, sensors, model
        self.k = 0
        self.rows = {"t": [], "pose": [], "true": [], "meas": [], "raw": [], "frame_idx": [], "step": []}
        self.frames = []
        self._cache_key = None
        self._cache = None

    def _contact(self, pose: ToolPose):
        key = (pose.x, pose.y, pose.z, pose.velocity_xy)
        if key != self._cache_key:
            self._cache_key, self._cache = key, simulate_contact(self.phantom, pose, self.cfg.contact)
        return self._cache

    def record(self, x: float, y: float, z: float, step: StepLabel, vy: float = 0.0) -> np.ndarray:
        t = self.k * self.cfg.tick
        pose = ToolPose(x, y, z, velocity_xy=(0.0, vy), t=t)
        patch, w = self._contact(pose)
        true = w.as_array()
        raw = self.sensors.raw.read(Wrench.from_array(true, t=t))
        meas = predict(self.model, raw).as_array() if self.model is not None else true

        if self.sensors.camera is not None and self.k % self.cfg.frame_every == 0:
            self.frames.append(self.sensors.camera.capture(patch, t))
        self.rows["t"].append(t)
        self.rows["pose"].append((x, y, z))
        self.rows["true"].append(true)
        self.rows["meas"].append(meas)
        self.rows["raw"].append(raw.channels)
        self.rows["frame_idx"].append(len(self.frames) - 1)
        self.rows["step"].append(int(step))
        self.k += 1
        return meas

    def trace(self, mode: str, commanded: Optional[float], meta: dict) -> ProtocolTrace:
        r = self.rows
        n_ch = self.sensors.raw.n_channels
        return ProtocolTrace(
            t=np.asarray(r["t"], dtype=float), pose=np.asarray(r["pose"], dtype=float).reshape(-1, 3),
            true=np.asarray(r["true"], dtype=float).reshape(-1, 6),
            meas=np.asarray(r["meas"], dtype=float).reshape(-1, 6),
            raw=np.asarray(r["raw"], dtype=float).reshape(-1, n_ch),
            frame_idx=np.asarray(r["frame_idx"], dtype=int), step=np.asarray(r["step"], dtype=int),
            frames=self.frames, commanded=commanded, mode=mode, meta=meta)


# --- 3. PROTOCOL PHASES ---

def _descend(rec: _Recorder, cfg: ProtocolConfig, mode: str) -> float:
    """Lowers z until measured Fz >= target; returns the trigger z."""
    x, y = cfg.start_xy
    z = cfg.start_height
    dz = cfg.descent_speed * cfg.tick
    z_limit = -cfg.contact.dome.max_indentation
    max_force = 0.0
    while True:
        fz = rec.record(x, y, z, StepLabel.DESCEND)[2]
        max_force = max(max_force, float(rec.rows["true"][-1][2]))
        if fz >= cfg.target_force:
            return z
        z_next = cfg.start_height - rec.k * dz
        if z_next < z_limit:
            raise SimulationFault(
                f"target force {cfg.target_force:.1f} N unreachable before the z-limit "
                f"{z_limit:.2f} mm: max achieved {max_force:.2f} N",
                trace=rec.trace(mode, cfg.target_force, {"max_force": max_force}))
        z = z_next


def _retract(rec: _Recorder, cfg: ProtocolConfig, x: float, y: float, z: float) -> float:
    """Raises back to the start height; returns the disengage time (Fz < 0.1 N)."""
    dz = cfg.retract_speed * cfg.tick
    disengage_t = None
    n = max(1, int(np.ceil((cfg.start_height - z) / dz)))
    for i in range(1, n + 1):
        zi = min(cfg.start_height, z + i * dz)
        rec.record(x, y, zi, StepLabel.RETRACT)
        if disengage_t is None and rec.rows["true"][-1][2] < DISENGAGE_FORCE_N:
            disengage_t = rec.rows["t"][-1]
    return float(disengage_t) if disengage_t is not None else float("nan")


def run_protocol(phantom: Phantom, cfg: ProtocolConfig, sensors: Optional[SensorSuite] = None,
                 model: Optional[MLPModel] = None) -> ProtocolTrace:
    """Position-controlled five-step protocol.

    The measured wrench is the calibrated estimate when `model` is given, else the
    true wrench. z is constant from the trigger tick until retraction.
    """
    sensors = sensors or SensorSuite.from_seed(0)
    rec = _Recorder(phantom, cfg, sensors, model)
    x0, y0 = cfg.start_xy
    logger.info(f"--- Running protocol: target {cfg.target_force:.1f} N, travel {cfg.travel:.0f} mm ---")

    z = _descend(rec, cfg, "position")
    trigger_t = rec.rows["t"][-1]
    for _ in range(cfg.dwell_ticks):
        rec.record(x0, y0, z, StepLabel.DWELL)
    n = cfg.sweep_ticks
    for i in range(1, n + 1):
        rec.record(x0, y0 + cfg.travel * i / n, z, StepLabel.PLOUGH, vy=cfg.sweep_speed)
    y_end = y0 + cfg.travel
    for _ in range(cfg.dwell_ticks):
        rec.record(x0, y_end, z, StepLabel.HOLD)
    disengage_t = _retract(rec, cfg, x0, y_end, z)

    trace = rec.trace("position", cfg.target_force,
                      {"trigger_t": trigger_t, "trigger_z": z, "disengage_t": disengage_t})
    trace.validate()
    logger.debug(f"trigger at t = {trigger_t:.4f} s, z = {z:.4f} mm; {len(trace)} ticks")
    return trace


# --- 4. IMPEDANCE FORCE TRACKING ---

class _ImpedanceLoop:
    """Admittance-style z correction: force error -> position increment."""

    def __init__(self, target: float, params: ImpedanceParams, tick: float):
        self.target, self.params, self.tick = target, params, tick
        self.error_integral = 0.0
        self.z_rate = 0.0

    def update(self, z: float, fz: float) -> float:
        if self.params.stiffness == 0:
            return z
        error = fz - self.target
        self.error_integral += error * self.tick
        dz = (error - self.params.damping * self.z_rate
              + self.params.integral * self.error_integral) / self.params.stiffness
        self.z_rate = dz / self.tick
        return z + dz


def impedance_force_track(phantom: Phantom, target: float, params: ImpedanceParams,
                          sensors: Optional[SensorSuite] = None, model: Optional[MLPModel] = None,
                          cfg: Optional[ProtocolConfig] = None) -> ProtocolTrace:
    """Same five steps, with z regulated on the measured Fz through steps 2-4.

    Feedback uses the calibrated estimate when a model is given, so estimate drift
    (moment saturation) becomes real force drift. Aborts when |Fz| exceeds three
    times the target or the dome would pass its indentation limit.
    """
    if not target > 0:
        raise ValueError(f"target force must be > 0, got {target}")
    base = cfg or ProtocolConfig()
    cfg = replace(base, target_force=target)
    sensors = sensors or SensorSuite.from_seed(0)
    rec = _Recorder(phantom, cfg, sensors, model)
    loop = _ImpedanceLoop(target, params, cfg.tick)
    x0, y0 = cfg.start_xy
    z_limit = -cfg.contact.dome.max_indentation
    logger.info(f"--- Tracking {target:.1f} N (K = {params.stiffness}, B = {params.damping}) ---")

    z = _descend(rec, cfg, "impedance")
    fz = rec.rows["meas"][-1][2]
    n = cfg.sweep_ticks
    phases = ([(StepLabel.DWELL, lambda i: y0, 0.0)] * cfg.dwell_ticks
              + [(StepLabel.PLOUGH, lambda i: y0 + cfg.travel * i / n, cfg.sweep_speed)] * n
              + [(StepLabel.HOLD, lambda i: y0 + cfg.travel, 0.0)] * cfg.dwell_ticks)
    sweep_i = 0
    y = y0
    for step, y_of, vy in phases:
        z = loop.update(z, fz)
        if step == StepLabel.PLOUGH:
            sweep_i += 1
        y = y_of(sweep_i)
        if z < z_limit:
            raise SimulationFault(
                f"impedance loop drove z to {z:.2f} mm, past the indentation limit {z_limit:.2f} mm",
                trace=rec.trace("impedance", target, {}))
        fz = rec.record(x0, y, z, step, vy=vy)[2]
        if abs(fz) > INSTABILITY_FACTOR * target:
            raise SimulationFault(
                f"impedance loop unstable at t = {rec.rows['t'][-1]:.3f} s: |Fz| = {abs(fz):.2f} N "
                f"> {INSTABILITY_FACTOR:.0f} x {target:.1f} N",
                trace=rec.trace("impedance", target, {}))

    z = min(z, cfg.start_height)
    disengage_t = _retract(rec, cfg, x0, y, z)
    trace = rec.trace("impedance", target, {"disengage_t": disengage_t})
    trace.validate()
    return trace
