# -*- coding: utf-8 -*-
"""
src/detection/features.py
Hand-crafted features for the two detection branches.

Image (35 values): 4x4 pooled block means, global mean and std, 8-band
horizontal and 8-band vertical gradient energy, ridge count of the smoothed
cross-profile (tendons run along Y, i.e. along image columns).

F/T window (20 values): per-component mean, variance and slope, plus mean and max
of |Fz - F_ref|.
"""

from typing import Optional

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks

from src.sensors.stream import SENSOR_RATE_HZ
from src.sensors.tactile import TactileImage
from src.utils.errors import ShapeMismatchError

# --- 1. IMAGE FEATURES ---
POOL_GRID = 4
GRADIENT_BANDS = 8
PROFILE_BAND = (0.375, 0.625)      # central rows averaged into the cross-profile
PROFILE_SMOOTHING_PX = 1.5
RIDGE_PROMINENCE = 0.1             # fraction of the profile range
MIN_PROFILE_RANGE = 0.02

IMAGE_FEATURES = POOL_GRID * POOL_GRID + 2 + 2 * GRADIENT_BANDS + 1
FT_FEATURES = 6 * 3 + 2


def _as_array(img) -> np.ndarray:
    arr = img.intensities if isinstance(img, TactileImage) else img
    arr = np.asarray(arr, dtype=float)
    if arr.ndim != 2 or min(arr.shape) < POOL_GRID:
        raise ShapeMismatchError(f"expected a 2-D image, got shape {arr.shape}")
    return arr


def _band_sums(values: np.ndarray, n_bands: int) -> np.ndarray:
    return np.array([chunk.sum() for chunk in np.array_split(values, n_bands)])


def cross_profile(img) -> np.ndarray:
    arr = _as_array(img)
    lo, hi = (int(round(f * arr.shape[0])) for f in PROFILE_BAND)
    return arr[lo:max(hi, lo + 1)].mean(axis=0)


def ridge_count(img) -> int:
    """Number of prominent maxima across the central band of the image."""
    profile = gaussian_filter1d(cross_profile(img), PROFILE_SMOOTHING_PX, mode="nearest")
    span = float(profile.max() - profile.min())
    if span < MIN_PROFILE_RANGE:
        return 0
    peaks, _ = find_peaks(profile, prominence=RIDGE_PROMINENCE * span)
    return int(len(peaks))


def featurize_image(img) -> np.ndarray:
    arr = _as_array(img)
    blocks = [block.mean() for rows in np.array_split(arr, POOL_GRID, axis=0)
              for block in np.array_split(rows, POOL_GRID, axis=1)]
    gx = np.diff(arr, axis=1) ** 2        # horizontal gradient energy
    gy = np.diff(arr, axis=0) ** 2
    h_energy = _band_sums(gx.sum(axis=0), GRADIENT_BANDS)
    v_energy = _band_sums(gy.sum(axis=1), GRADIENT_BANDS)
    return np.concatenate([blocks, [arr.mean(), arr.std()], h_energy, v_energy, [ridge_count(arr)]])


# --- 2. FORCE/TORQUE WINDOW FEATURES ---

def summarize_ft(window: np.ndarray, length: Optional[int] = None,
                 f_ref: Optional[float] = None, rate: float = SENSOR_RATE_HZ) -> np.ndarray:
    """`window` is (L, 6) measured wrenches at the sensor rate."""
    window = np.asarray(window, dtype=float)
    if window.ndim != 2 or window.shape[1] != 6:
        raise ShapeMismatchError(f"F/T window must be (L, 6), got {window.shape}")
    if length is not None and window.shape[0] != length:
        raise ShapeMismatchError(f"F/T window length {window.shape[0]} != expected {length}")
    if window.shape[0] < 2:
        raise ShapeMismatchError("F/T window needs at least two samples")

    t = np.arange(window.shape[0]) / rate
    tc = t - t.mean()
    mean = window.mean(axis=0)
    var = window.var(axis=0)
    slope = tc @ (window - mean) / (tc @ tc)
    fz = window[:, 2]
    dev = np.abs(fz - (fz.mean() if f_ref is None else f_ref))
    return np.concatenate([mean, var, slope, [dev.mean(), dev.max()]])
