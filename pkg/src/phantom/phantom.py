# -*- coding: utf-8 -*-
"""
src/phantom/phantom.py

Phantom geometry and materials: a silicone block with embedded stiff tendons.
The block is exposed to the contact model as a Winkler foundation whose local
stiffness k(x, y) encodes the subsurface tendon structure:

    k(x, y) = k_sub * (1 + A * <exp(-top_depth / lam)>_disc)

where <.>_disc is the average over a small lateral footprint disc of the depth
weight of whichever tendon projection covers each disc sample (0 where none does).
For a single tendon depth this is exp(-top_depth / lam) * coverage(x, y).

Coordinates: millimeters, footprint centred on `origin_xy`, X across the block
(width), Y along the block (length, the sweep axis). Moduli in pascals, foundation
stiffness in N/m^3.
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np
import yaml
from scipy.interpolate import RegularGridInterpolator
from scipy.signal import fftconvolve

from src.utils.errors import SpecValidationError

# --- 1. MODEL DEFAULTS ---
SUBSTRATE_MODULUS_PA = 60e3      # Ecoflex 00-20, assumed
TENDON_MODULUS_PA = 2.58e9       # PLA
AMPLIFICATION = 4.0
DEPTH_DECAY_MM = 5.0
FOOTPRINT_RADIUS_MM = 6.0
COVERAGE_PITCH_MM = 0.5
MINERAL_OIL_FRICTION = 0.1

Point = Tuple[float, float]


# --- 2. DOMAIN TYPES ---

@dataclass(frozen=True)
class MaterialParams:
    elastic_modulus: float        # Pa
    foundation_stiffness: float   # N/m^3

    @classmethod
    def from_modulus(cls, modulus: float, layer_thickness_mm: float) -> "MaterialParams":
        """Winkler stiffness of a layer: k = E / h."""
        return cls(modulus, modulus / (layer_thickness_mm * 1e-3))


@dataclass(frozen=True)
class TendonSegment:
    start_xy: Point
    end_xy: Point
    diameter: float
    top_depth: float
    material: MaterialParams = None
    # top depth at end_xy; None keeps the segment level
    end_top_depth: Optional[float] = None

    def __post_init__(self):
        if self.material is None:
            object.__setattr__(self, "material",
                               MaterialParams.from_modulus(TENDON_MODULUS_PA, max(self.diameter, 1e-9)))

    @property
    def deepest_top(self) -> float:
        if self.end_top_depth is None:
            return self.top_depth
        return max(self.top_depth, self.end_top_depth)


@dataclass(frozen=True)
class PhantomSpec:
    length: float = 200.0
    width: float = 100.0
    thickness: float = 30.0
    substrate: MaterialParams = field(
        default_factory=lambda: MaterialParams.from_modulus(SUBSTRATE_MODULUS_PA, 30.0))
    tendons: Tuple[TendonSegment, ...] = ()
    surface_friction: float = MINERAL_OIL_FRICTION
    origin_xy: Point = (0.0, 0.0)
    amplification: float = AMPLIFICATION
    depth_decay: float = DEPTH_DECAY_MM
    footprint_radius: float = FOOTPRINT_RADIUS_MM
    coverage_pitch: float = COVERAGE_PITCH_MM

    @property
    def x_bounds(self) -> Point:
        return (self.origin_xy[0] - self.width / 2, self.origin_xy[0] + self.width / 2)

    @property
    def y_bounds(self) -> Point:
        return (self.origin_xy[1] - self.length / 2, self.origin_xy[1] + self.length / 2)


# --- 3. VALIDATION ---

def validate_spec(spec: PhantomSpec) -> None:
    for name in ("length", "width", "thickness"):
        if not getattr(spec, name) > 0:
            raise SpecValidationError(f"block.{name}", f"must be > 0, got {getattr(spec, name)}")
    if not spec.substrate.elastic_modulus > 0:
        raise SpecValidationError("substrate.modulus", "must be > 0")
    if not spec.substrate.foundation_stiffness > 0:
        raise SpecValidationError("substrate.foundation_stiffness", "must be > 0")
    if spec.surface_friction < 0:
        raise SpecValidationError("friction", f"must be >= 0, got {spec.surface_friction}")
    for name in ("depth_decay", "footprint_radius", "coverage_pitch"):
        if not getattr(spec, name) > 0:
            raise SpecValidationError(name, "must be > 0")
    if spec.amplification < 0:
        raise SpecValidationError("amplification", "must be >= 0")

    (x0, x1), (y0, y1) = spec.x_bounds, spec.y_bounds
    for i, t in enumerate(spec.tendons):
        tag = f"tendons[{i}]"
        if not t.diameter > 0:
            raise SpecValidationError(f"{tag}.diameter", f"must be > 0, got {t.diameter}")
        if t.top_depth < 0 or (t.end_top_depth is not None and t.end_top_depth < 0):
            raise SpecValidationError(f"{tag}.top_depth", "must be >= 0")
        if tuple(t.start_xy) == tuple(t.end_xy):
            raise SpecValidationError(f"{tag}.end", "start and end coincide")
        for label, (px, py) in (("start", t.start_xy), ("end", t.end_xy)):
            if not (x0 <= px <= x1 and y0 <= py <= y1):
                raise SpecValidationError(f"{tag}.{label}",
                                          f"({px}, {py}) lies outside the block footprint")
        if t.deepest_top + t.diameter > spec.thickness:
            raise SpecValidationError(
                f"{tag}.top_depth",
                f"top_depth + diameter = {t.deepest_top + t.diameter} exceeds thickness "
                f"{spec.thickness} (protrudes through bottom)")
        if not t.material.elastic_modulus > 0:
            raise SpecValidationError(f"{tag}.modulus", "must be > 0")


# --- 4. PHANTOM ---

def _disc_offsets(radius: float, pitch: float) -> np.ndarray:
    n = int(np.floor(radius / pitch))
    ticks = pitch * np.arange(-n, n + 1)
    gx, gy = np.meshgrid(ticks, ticks, indexing="ij")
    inside = gx ** 2 + gy ** 2 <= radius ** 2 + 1e-12
    return np.column_stack([gx[inside], gy[inside]])


class Phantom:
    """Validated, immutable phantom exposing the stiffness-field queries."""

    def __init__(self, spec: PhantomSpec):
        self.spec = spec
        self.k_sub = spec.substrate.foundation_stiffness
        self._offsets = _disc_offsets(spec.footprint_radius, spec.coverage_pitch)
        self._interp = None

    # single tendon capsule test: projection clipped to the segment
    def _segment_params(self, pts: np.ndarray, t: TendonSegment):
        a = np.asarray(t.start_xy, dtype=float)
        b = np.asarray(t.end_xy, dtype=float)
        ab = b - a
        s = np.clip(((pts - a) @ ab) / (ab @ ab), 0.0, 1.0)
        closest = a + s[..., None] * ab
        dist = np.linalg.norm(pts - closest, axis=-1)
        return s, dist

    def depth_weight(self, pts: np.ndarray) -> np.ndarray:
        """Max over covering tendons of exp(-top_depth/lam); 0 where uncovered."""
        pts = np.asarray(pts, dtype=float)
        w = np.zeros(pts.shape[:-1])
        for t in self.spec.tendons:
            s, dist = self._segment_params(pts, t)
            end_depth = t.top_depth if t.end_top_depth is None else t.end_top_depth
            depth = t.top_depth + s * (end_depth - t.top_depth)
            inside = dist <= t.diameter / 2
            w = np.where(inside, np.maximum(w, np.exp(-depth / self.spec.depth_decay)), w)
        return w

    def covered(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        mask = np.zeros(pts.shape[:-1], dtype=bool)
        for t in self.spec.tendons:
            _, dist = self._segment_params(pts, t)
            mask |= dist <= t.diameter / 2
        return mask

    def contains(self, x, y) -> np.ndarray:
        (x0, x1), (y0, y1) = self.spec.x_bounds, self.spec.y_bounds
        return (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)

    def _check_inside(self, x: float, y: float) -> None:
        if not self.contains(x, y):
            raise SpecValidationError("query", f"({x}, {y}) is outside the block footprint")

    def effective_stiffness(self, x: float, y: float) -> float:
        self._check_inside(x, y)
        if not self.spec.tendons:
            return self.k_sub
        weights = self.depth_weight(np.array([x, y]) + self._offsets)
        return self.k_sub * (1.0 + self.spec.amplification * float(weights.mean()))

    def tendon_coverage(self, x: float, y: float, radius: Optional[float] = None) -> float:
        """Fraction of a disc (default: footprint disc) lying over tendon projections."""
        self._check_inside(x, y)
        offsets = self._offsets if radius is None else _disc_offsets(radius, self.spec.coverage_pitch)
        return float(self.covered(np.array([x, y]) + offsets).mean())

    # --- raster used by the contact grid ---

    def _build_raster(self) -> RegularGridInterpolator:
        spec = self.spec
        cp = spec.coverage_pitch
        nx, ny = int(round(spec.width / cp)), int(round(spec.length / cp))
        xs = spec.x_bounds[0] + cp * np.arange(nx + 1)
        ys = spec.y_bounds[0] + cp * np.arange(ny + 1)
        if spec.tendons:
            max_d = max(t.diameter for t in spec.tendons)
            pad = int(np.ceil((spec.footprint_radius + max_d) / cp))
            px = spec.x_bounds[0] + cp * np.arange(-pad, nx + 1 + pad)
            py = spec.y_bounds[0] + cp * np.arange(-pad, ny + 1 + pad)
            gx, gy = np.meshgrid(px, py, indexing="ij")
            weights = self.depth_weight(np.stack([gx, gy], axis=-1))
            m = int(np.floor(spec.footprint_radius / cp))
            ticks = np.arange(-m, m + 1) * cp
            kx, ky = np.meshgrid(ticks, ticks, indexing="ij")
            kernel = (kx ** 2 + ky ** 2 <= spec.footprint_radius ** 2 + 1e-12).astype(float)
            kernel /= kernel.sum()
            smooth = np.clip(fftconvolve(weights, kernel, mode="same"), 0.0, 1.0)
            smooth = smooth[pad:pad + nx + 1, pad:pad + ny + 1]
            field_ = self.k_sub * (1.0 + spec.amplification * smooth)
        else:
            field_ = np.full((nx + 1, ny + 1), self.k_sub)
        return RegularGridInterpolator((xs, ys), field_, method="linear",
                                       bounds_error=False, fill_value=0.0)

    def stiffness_grid(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Vectorized k lookup (N/m^3); 0 outside the footprint (no material)."""
        if self._interp is None:
            self._interp = self._build_raster()
        xs, ys = np.broadcast_arrays(np.asarray(xs, float), np.asarray(ys, float))
        if not self.spec.tendons:
            return np.where(self.contains(xs, ys), self.k_sub, 0.0)
        return self._interp(np.stack([xs, ys], axis=-1))


def build_phantom(spec: PhantomSpec) -> Phantom:
    validate_spec(spec)
    return Phantom(spec)


def effective_stiffness(phantom: Phantom, x: float, y: float) -> float:
    return phantom.effective_stiffness(x, y)


# --- 5. SPEC TRANSFORMS ---

def mirror_spec(spec: PhantomSpec) -> PhantomSpec:
    """Mirror the phantom about the footprint's x-axis (y -> 2*oy - y)."""
    oy = spec.origin_xy[1]
    flip = lambda p: (p[0], 2 * oy - p[1])
    tendons = tuple(replace(t, start_xy=flip(t.start_xy), end_xy=flip(t.end_xy)) for t in spec.tendons)
    return replace(spec, tendons=tendons)


def translate_spec(spec: PhantomSpec, dx: float, dy: float) -> PhantomSpec:
    shift = lambda p: (p[0] + dx, p[1] + dy)
    tendons = tuple(replace(t, start_xy=shift(t.start_xy), end_xy=shift(t.end_xy)) for t in spec.tendons)
    return replace(spec, tendons=tendons, origin_xy=shift(spec.origin_xy))


# --- 6. STRUCTURED-TEXT CONFIG ---

CONFIG_HEADER = (
    "# PhantomSpec configuration\n"
    "# units: lengths in millimeters, moduli in pascals\n"
    "# substrate foundation stiffness is derived as modulus / thickness (N/m^3)\n"
)


def spec_to_dict(spec: PhantomSpec) -> dict:
    tendons = []
    for t in spec.tendons:
        entry = {
            "start": [float(t.start_xy[0]), float(t.start_xy[1])],
            "end": [float(t.end_xy[0]), float(t.end_xy[1])],
            "diameter": float(t.diameter),
            "top_depth": float(t.top_depth),
            "modulus": float(t.material.elastic_modulus),
        }
        if t.end_top_depth is not None:
            entry["end_top_depth"] = float(t.end_top_depth)
        tendons.append(entry)
    return {
        "block": {"length": spec.length, "width": spec.width, "thickness": spec.thickness},
        "substrate": {"modulus": spec.substrate.elastic_modulus},
        "friction": spec.surface_friction,
        "origin": [float(spec.origin_xy[0]), float(spec.origin_xy[1])],
        "stiffness_model": {
            "amplification": spec.amplification,
            "depth_decay": spec.depth_decay,
            "footprint_radius": spec.footprint_radius,
        },
        "tendons": tendons,
    }


def spec_from_dict(cfg: dict) -> PhantomSpec:
    try:
        block = cfg["block"]
        thickness = float(block["thickness"])
        model = cfg.get("stiffness_model", {})
        tendons = tuple(
            TendonSegment(
                start_xy=tuple(map(float, t["start"])),
                end_xy=tuple(map(float, t["end"])),
                diameter=float(t["diameter"]),
                top_depth=float(t["top_depth"]),
                material=MaterialParams.from_modulus(float(t.get("modulus", TENDON_MODULUS_PA)),
                                                     float(t["diameter"])),
                end_top_depth=None if t.get("end_top_depth") is None else float(t["end_top_depth"]),
            )
            for t in cfg.get("tendons", []) or []
        )
        return PhantomSpec(
            length=float(block["length"]),
            width=float(block["width"]),
            thickness=thickness,
            substrate=MaterialParams.from_modulus(float(cfg["substrate"]["modulus"]), thickness),
            tendons=tendons,
            surface_friction=float(cfg.get("friction", MINERAL_OIL_FRICTION)),
            origin_xy=tuple(map(float, cfg.get("origin", (0.0, 0.0)))),
            amplification=float(model.get("amplification", AMPLIFICATION)),
            depth_decay=float(model.get("depth_decay", DEPTH_DECAY_MM)),
            footprint_radius=float(model.get("footprint_radius", FOOTPRINT_RADIUS_MM)),
        )
    except KeyError as e:
        raise SpecValidationError(str(e.args[0]), "missing key in phantom config") from e


def save_phantom_spec(spec: PhantomSpec, path: str) -> str:
    with open(path, "w") as f:
        f.write(CONFIG_HEADER)
        yaml.safe_dump(spec_to_dict(spec), f, sort_keys=False)
    return path


def load_phantom_spec(path: str) -> PhantomSpec:
    with open(path) as f:
        return spec_from_dict(yaml.safe_load(f))


def sweep_stiffness(phantom: Phantom, x: float, ys: Sequence[float]) -> np.ndarray:
    return np.array([phantom.effective_stiffness(x, y) for y in ys])
