# -*- coding: utf-8 -*-
"""
src/sensors/tactile.py
Synthetic visuotactile frames rendered from a contact patch.

The dome membrane deflects in proportion to the local contact pressure, so the
rendered quantity is the equivalent deflection u = p / pressure_scale (a pressure
normalised by reference stiffness x reference depth). Stiff subsurface tendons
therefore show up as bright ridges. Orthographic view, radial vignette, seeded
Gaussian pixel noise.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from src.contact.contact import ContactPatch

# --- 1. CONFIGURATION ---


@dataclass(frozen=True)
class SensorNoiseModel:
    image_noise_sd: float = 0.005
    channel_noise_sd: float = 1e-3
    drift_rate: float = 1e-4         # channel units per second
    saturation_moment: float = 500.0  # N*mm, 0 disables clipping
    seed: int = 0

    def __post_init__(self):
        for name in ("image_noise_sd", "channel_noise_sd", "drift_rate", "saturation_moment"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def noiseless(cls, seed: int = 0, saturation_moment: float = 500.0) -> "SensorNoiseModel":
        return cls(0.0, 0.0, 0.0, saturation_moment, seed)


@dataclass(frozen=True)
class TactileConfig:
    resolution: int = 64
    fov_radius: float = 40.0        # mm, half-width of the square field of view
    background: float = 0.2
    vignette_strength: float = 0.3
    pressure_scale: float = 5e4     # Pa; reference stiffness 2e6 N/m^3 times reference depth 0.025 m


@dataclass
class TactileImage:
    intensities: np.ndarray   # (height, width), rows along +Y, columns along +X
    t: float = 0.0

    @property
    def height(self) -> int:
        return self.intensities.shape[0]

    @property
    def width(self) -> int:
        return self.intensities.shape[1]


# --- 2. RENDERING ---

def _tone(u: np.ndarray) -> np.ndarray:
    """Fixed monotone map of normalised deflection into [0, 1)."""
    return u / (1.0 + u)


def pixel_axis(cfg: TactileConfig, resolution: int) -> np.ndarray:
    return cfg.fov_radius * ((np.arange(resolution) + 0.5) / resolution * 2.0 - 1.0)


def vignette(cfg: TactileConfig, resolution: int) -> np.ndarray:
    axis = pixel_axis(cfg, resolution)
    gx, gy = np.meshgrid(axis, axis)
    r2 = (gx ** 2 + gy ** 2) / cfg.fov_radius ** 2
    return 1.0 - cfg.vignette_strength * np.minimum(r2, 1.0)


def render_tactile(patch: ContactPatch, resolution: int = 64,
                   noise: Optional[SensorNoiseModel] = None,
                   cfg: Optional[TactileConfig] = None,
                   rng: Optional[np.random.Generator] = None,
                   t: float = 0.0) -> TactileImage:
    if resolution < 16:
        raise ValueError(f"resolution must be >= 16, got {resolution}")
    cfg = cfg or TactileConfig()
    noise = noise or SensorNoiseModel()
    rng = rng if rng is not None else np.random.default_rng(noise.seed)

    axis = pixel_axis(cfg, resolution)
    if patch.empty or patch.offsets.size < 2:
        u = np.zeros((resolution, resolution))
    else:
        interp = RegularGridInterpolator((patch.offsets, patch.offsets), patch.pressure,
                                         bounds_error=False, fill_value=0.0)
        gx, gy = np.meshgrid(axis, axis)          # rows follow y, columns follow x
        u = interp(np.stack([gx, gy], axis=-1)) / cfg.pressure_scale

    signal = cfg.background + (1.0 - cfg.background) * _tone(u)
    img = signal * vignette(cfg, resolution)
    if noise.image_noise_sd > 0:
        img = img + rng.normal(0.0, noise.image_noise_sd, img.shape)
    return TactileImage(np.clip(img, 0.0, 1.0), t=t)


class TactileCamera:
    """Seeded renderer used for one run; frames share one generator."""

    def __init__(self, noise: SensorNoiseModel, cfg: Optional[TactileConfig] = None):
        self.noise = noise
        self.cfg = cfg or TactileConfig()
        self.rng = np.random.default_rng([noise.seed, 1])

    def capture(self, patch: ContactPatch, t: float = 0.0) -> TactileImage:
        return render_tactile(patch, self.cfg.resolution, self.noise, self.cfg, self.rng, t)
