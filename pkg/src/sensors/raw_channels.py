# -*- coding: utf-8 -*-
"""
src/sensors/raw_channels.py
Uncalibrated multi-channel F/T front end.

    channels = M @ w_hat + Q @ w_hat**2 + offsets + drift(t) + noise

w_hat is the wrench normalised by nominal force / moment scales, with moments
soft-clipped beyond the saturation threshold before mixing. The mixing matrix is a
seeded random full-rank C x 6 matrix; calibration has to learn its inverse.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.contact.contact import Wrench
from src.sensors.tactile import SensorNoiseModel
from src.utils.errors import ShapeMismatchError, SpecValidationError

# --- 1. MIXING MODEL ---
N_CHANNELS = 12


@dataclass
class RawChannels:
    channels: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class MixingModel:
    n_channels: int = N_CHANNELS
    seed: int = 2026
    quadratic_gain: float = 0.02
    force_scale: float = 50.0      # N
    moment_scale: float = 500.0    # N*mm
    matrix: np.ndarray = field(init=False, repr=False, compare=False)
    quadratic: np.ndarray = field(init=False, repr=False, compare=False)
    offsets: np.ndarray = field(init=False, repr=False, compare=False)
    drift_direction: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_channels < 8:
            raise SpecValidationError("n_channels", f"need at least 8 channels, got {self.n_channels}")
        rng = np.random.default_rng(self.seed)
        matrix = rng.normal(0.0, 1.0, (self.n_channels, 6))
        if np.linalg.matrix_rank(matrix) < 6:
            raise SpecValidationError("mixing", "mixing matrix is not full rank")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "quadratic",
                           self.quadratic_gain * rng.normal(0.0, 1.0, (self.n_channels, 6)))
        object.__setattr__(self, "offsets", rng.uniform(-1.0, 1.0, self.n_channels))
        drift = rng.normal(0.0, 1.0, self.n_channels)
        object.__setattr__(self, "drift_direction", drift / np.linalg.norm(drift))

    @property
    def scales(self) -> np.ndarray:
        return np.array([self.force_scale] * 3 + [self.moment_scale] * 3)

    def linear_only(self) -> "MixingModel":
        return MixingModel(self.n_channels, self.seed, 0.0, self.force_scale, self.moment_scale)


def soft_clip(moment: np.ndarray, threshold: float) -> np.ndarray:
    """Identity below threshold, tanh roll-off above it (saturates at 1.5 x threshold)."""
    if threshold <= 0:
        return moment
    mag = np.abs(moment)
    knee = 0.5 * threshold
    clipped = threshold + knee * np.tanh((mag - threshold) / knee)
    return np.where(mag > threshold, np.sign(moment) * clipped, moment)


# --- 2. FORWARD MODEL ---

def raw_from_wrench(w: Wrench, mixing: MixingModel, noise: SensorNoiseModel,
                    rng: Optional[np.random.Generator] = None) -> RawChannels:
    values = w.as_array()
    values[3:] = soft_clip(values[3:], noise.saturation_moment)
    w_hat = values / mixing.scales
    channels = mixing.matrix @ w_hat + mixing.quadratic @ (w_hat ** 2) + mixing.offsets
    channels = channels + noise.drift_rate * w.t * mixing.drift_direction
    if noise.channel_noise_sd > 0:
        rng = rng if rng is not None else np.random.default_rng(noise.seed)
        channels = channels + rng.normal(0.0, noise.channel_noise_sd, mixing.n_channels)
    return RawChannels(channels, t=w.t)


class RawSensor:
    """One simulated F/T sensor instance with its own seeded generator."""

    def __init__(self, mixing: Optional[MixingModel] = None, noise: Optional[SensorNoiseModel] = None):
        self.mixing = mixing or MixingModel()
        self.noise = noise or SensorNoiseModel()
        self.rng = np.random.default_rng([self.noise.seed, 2])

    @property
    def n_channels(self) -> int:
        return self.mixing.n_channels

    def read(self, w: Wrench) -> RawChannels:
        return raw_from_wrench(w, self.mixing, self.noise, self.rng)

    def check(self, raw: RawChannels) -> None:
        if raw.channels.shape != (self.n_channels,):
            raise ShapeMismatchError(f"expected {self.n_channels} channels, got {raw.channels.shape}")
