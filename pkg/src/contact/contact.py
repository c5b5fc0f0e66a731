# -*- coding: utf-8 -*-
"""
src/contact/contact.py

Dome-phantom contact on a Winkler foundation with Coulomb friction and a
ploughing term.

Sign conventions
  * pose.z is the dome's lowest point relative to the undeformed surface;
    negative means indented.
  * Fz is compression-positive (sum of p dA) in traces and metrics. Plots negate
    it to match the robot's downward-negative frame.
  * Lateral forces oppose the planar velocity.
  * Moments (N*mm) are taken about a reference point on the dome axis (or an
    offset point for rolling loads) located `sensor_lever` mm above the contact
    plane: T = sum(r x f) with r = (x, y, -h).
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.phantom.phantom import Phantom
from src.utils.errors import SimulationFault

# --- 1. CONFIGURATION ---
DOME_RADIUS_MM = 50.0
GRID_PITCH_MM = 0.25
PLOUGHING_COEFF = 0.3
SENSOR_LEVER_MM = 60.0

MM = 1e-3
MM2 = 1e-6


@dataclass(frozen=True)
class DomeGeometry:
    radius: float = DOME_RADIUS_MM

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"dome radius must be > 0, got {self.radius}")

    @property
    def max_indentation(self) -> float:
        """Validity limit of the paraboloidal cap approximation."""
        return self.radius / 4.0


@dataclass(frozen=True)
class ContactConfig:
    dome: DomeGeometry = field(default_factory=DomeGeometry)
    pitch: float = GRID_PITCH_MM
    ploughing_coeff: float = PLOUGHING_COEFF
    sensor_lever: float = SENSOR_LEVER_MM


@dataclass(frozen=True)
class ToolPose:
    x: float
    y: float
    z: float
    velocity_xy: Tuple[float, float] = (0.0, 0.0)
    t: float = 0.0

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"pose time must be >= 0, got {self.t}")


@dataclass
class ContactPatch:
    """Regular grid of samples centred on the dome axis."""
    center: Tuple[float, float]
    offsets: np.ndarray       # 1-D sample offsets (mm), same for both axes
    indentation: np.ndarray   # delta (mm), shape (n, n), index [ix, iy]
    stiffness: np.ndarray     # k (N/m^3)
    pressure: np.ndarray      # p = k * delta (Pa)
    pitch: float
    dome_radius: float

    @property
    def empty(self) -> bool:
        return not np.any(self.indentation > 0)

    @property
    def contact_radius(self) -> float:
        depth = float(self.indentation.max()) if self.indentation.size else 0.0
        return float(np.sqrt(2 * self.dome_radius * depth)) if depth > 0 else 0.0


@dataclass(frozen=True)
class Wrench:
    Fx: float = 0.0
    Fy: float = 0.0
    Fz: float = 0.0
    Tx: float = 0.0
    Ty: float = 0.0
    Tz: float = 0.0
    t: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.Fx, self.Fy, self.Fz, self.Tx, self.Ty, self.Tz])

    @classmethod
    def from_array(cls, values, t: float = 0.0) -> "Wrench":
        v = [float(c) for c in values]
        return cls(*v, t=t)


COMPONENTS = ("Fx", "Fy", "Fz", "Tx", "Ty", "Tz")


# --- 2. INDENTATION FIELD ---

def _empty_patch(pose: ToolPose, dome: DomeGeometry, pitch: float) -> ContactPatch:
    zeros = np.zeros((1, 1))
    return ContactPatch((pose.x, pose.y), np.zeros(1), zeros, zeros.copy(), zeros.copy(),
                        pitch, dome.radius)


def indentation_field(dome: DomeGeometry, pose: ToolPose, phantom: Phantom,
                      pitch: float = GRID_PITCH_MM) -> ContactPatch:
    """delta(r) = max(0, -z - r^2 / 2R) sampled on a grid centred on the dome axis."""
    if not pitch > 0:
        raise ValueError(f"pitch must be > 0, got {pitch}")
    depth = -pose.z
    if depth <= 0:
        return _empty_patch(pose, dome, pitch)
    if depth > dome.max_indentation:
        raise SimulationFault(
            f"indentation {depth:.3f} mm exceeds the cap approximation limit R/4 = "
            f"{dome.max_indentation:.3f} mm")

    a = np.sqrt(2 * dome.radius * depth)
    n = int(np.ceil(a / pitch))
    offsets = pitch * np.arange(-n, n + 1)
    ox, oy = np.meshgrid(offsets, offsets, indexing="ij")
    delta = np.maximum(0.0, depth - (ox ** 2 + oy ** 2) / (2 * dome.radius))
    k = phantom.stiffness_grid(pose.x + ox, pose.y + oy)
    k = np.where(delta > 0, k, 0.0)
    pressure = k * delta * MM
    return ContactPatch((pose.x, pose.y), offsets, delta, k, pressure, pitch, dome.radius)


def contact_area(patch: ContactPatch) -> float:
    """Grid-counted contact area (mm^2)."""
    return float(np.count_nonzero(patch.indentation > 0)) * patch.pitch ** 2


# --- 3. WRENCH ---

def contact_wrench(patch: ContactPatch, phantom: Phantom, pose: ToolPose,
                   cfg: Optional[ContactConfig] = None,
                   reference_xy: Optional[Tuple[float, float]] = None) -> Wrench:
    cfg = cfg or ContactConfig()
    if patch.empty:
        return Wrench(t=pose.t)

    dA = patch.pitch ** 2 * MM2
    load = patch.pressure * dA            # N per sample
    fz = float(load.sum())

    ox, oy = np.meshgrid(patch.offsets, patch.offsets, indexing="ij")
    vx, vy = pose.velocity_xy
    speed = float(np.hypot(vx, vy))
    fx_i = np.zeros_like(load)
    fy_i = np.zeros_like(load)
    if speed > 0:
        ux, uy = vx / speed, vy / speed
        s = ox * ux + oy * uy                     # coordinate along motion
        leading = (s > 0) & (patch.indentation > 0)
        slope = np.where(leading, s / patch.dome_radius, 0.0)   # |d delta / ds|
        lateral = phantom.spec.surface_friction * load + cfg.ploughing_coeff * load * slope
        fx_i = -lateral * ux
        fy_i = -lateral * uy
    fx, fy = float(fx_i.sum()), float(fy_i.sum())

    ref = reference_xy if reference_xy is not None else (pose.x, pose.y)
    rx = ox + (patch.center[0] - ref[0])
    ry = oy + (patch.center[1] - ref[1])
    h = cfg.sensor_lever
    tx = float(np.sum(ry * load)) + h * fy
    ty = -h * fx - float(np.sum(rx * load))
    tz = float(np.sum(rx * fy_i - ry * fx_i))
    return Wrench(fx, fy, fz, tx, ty, tz, t=pose.t)


def closed_form_sphere_force(k: float, R: float, d: float) -> float:
    """Winkler load of a paraboloidal cap: integral of k(d - r^2/2R) 2 pi r dr = pi k R d^2 (SI)."""
    return float(np.pi * k * R * d ** 2)


def simulate_contact(phantom: Phantom, pose: ToolPose, cfg: Optional[ContactConfig] = None,
                     reference_xy=None) -> Tuple[ContactPatch, Wrench]:
    cfg = cfg or ContactConfig()
    patch = indentation_field(cfg.dome, pose, phantom, cfg.pitch)
    return patch, contact_wrench(patch, phantom, pose, cfg, reference_xy)
