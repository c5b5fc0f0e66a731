# -*- coding: utf-8 -*-
"""
src/phantom/presets.py
Canonical phantom geometries for the four tendon experiments and the uniform
reference tendon. The sweep runs along +Y from y = -60 to y = +60 at x = 0.

Unstated geometry (block size, tendon lengths, widths, crossing angle) uses
symmetric defaults; the stated values are kept exactly:
  exp2  top depths differ by 1.5 mm, constant diameter, sloped transition
  exp3  straight 3.5 mm tendon, top 2.3 mm below the surface; the crossed arms
        are half as wide so the pair under the tool matches the straight width
  exp4  thin pair and thick tendon, all tops 1.8 mm below the surface
"""

from enum import Enum

from src.phantom.phantom import PhantomSpec, TendonSegment

# --- 1. PRESET IDS ---


class ExperimentId(str, Enum):
    EXP1 = "exp1"
    EXP2 = "exp2"
    EXP3 = "exp3"
    EXP4 = "exp4"
    UNIFORM = "uniform"


# Nominal force levels used in each experiment (N)
DEFAULT_FORCE = {
    ExperimentId.EXP1: 25.0,
    ExperimentId.EXP2: 25.0,
    ExperimentId.EXP3: 45.0,
    ExperimentId.EXP4: 35.0,
    ExperimentId.UNIFORM: 25.0,
}

DESCRIPTIONS = {
    ExperimentId.EXP1: "tendon -> no-tendon transition at y = 0",
    ExperimentId.EXP2: "constant-width tendon, top depth 3.0 -> 4.5 mm over a sloped transition",
    ExperimentId.EXP3: "crossed pair -> straight 3.5 mm tendon, 2.3 mm deep",
    ExperimentId.EXP4: "two thin parallel tendons merging into one thick tendon, 1.8 mm deep",
    ExperimentId.UNIFORM: "single uniform tendon along the whole length",
}

# Section windows (tool y, mm) well inside each geometry region of the sweep
SECTIONS = {
    ExperimentId.EXP1: {"tendon": (-60.0, 0.0), "no_tendon": (0.0, 60.0)},
    ExperimentId.EXP2: {"raised": (-60.0, -40.0), "lower": (40.0, 60.0)},
    ExperimentId.EXP3: {"crossed": (-60.0, -45.0), "straight": (30.0, 60.0)},
    ExperimentId.EXP4: {"double": (-60.0, -25.0), "thick": (20.0, 60.0)},
}

EXP2_RAISED_DEPTH = 3.0
EXP2_HEIGHT_STEP = 1.5
EXP3_DEPTH = 2.3
EXP3_DIAMETER = 3.5
EXP3_ARM_OFFSET = 5.0         # arm x at the block end and at the junction
EXP4_DEPTH = 1.8
EXP4_THIN_DIAMETER = 1.5
EXP4_THICK_DIAMETER = 5.0
EXP4_SPACING = 16.0


def parse_experiment_id(value) -> ExperimentId:
    if isinstance(value, ExperimentId):
        return value
    try:
        return ExperimentId(str(getattr(value, "value", value)).lower())
    except ValueError:
        valid = ", ".join(e.value for e in ExperimentId)
        raise ValueError(f"Unknown preset '{value}'. Valid presets: {valid}")


# --- 2. GEOMETRIES ---

def _exp1():
    return (TendonSegment((0.0, -99.0), (0.0, 0.0), diameter=6.0, top_depth=2.0),)


def _exp2():
    d = 2.5
    lo = EXP2_RAISED_DEPTH + EXP2_HEIGHT_STEP
    return (
        TendonSegment((0.0, -99.0), (0.0, -5.0), diameter=d, top_depth=EXP2_RAISED_DEPTH),
        TendonSegment((0.0, -5.0), (0.0, 5.0), diameter=d, top_depth=EXP2_RAISED_DEPTH, end_top_depth=lo),
        TendonSegment((0.0, 5.0), (0.0, 99.0), diameter=d, top_depth=lo),
    )


def _exp3():
    # shallow X under the sweep line, arms ending where the straight tendon starts
    d, h, w = EXP3_DIAMETER, EXP3_DEPTH, EXP3_ARM_OFFSET
    arm = d / 2
    return (
        TendonSegment((-w, -95.0), (w, -10.0), diameter=arm, top_depth=h),
        TendonSegment((w, -95.0), (-w, -10.0), diameter=arm, top_depth=h),
        TendonSegment((0.0, -10.0), (0.0, 99.0), diameter=d, top_depth=h),
    )


def _exp4():
    half = EXP4_SPACING / 2
    thin, thick, h = EXP4_THIN_DIAMETER, EXP4_THICK_DIAMETER, EXP4_DEPTH
    return (
        TendonSegment((-half, -99.0), (-half, -10.0), diameter=thin, top_depth=h),
        TendonSegment((half, -99.0), (half, -10.0), diameter=thin, top_depth=h),
        TendonSegment((-half, -10.0), (-1.5, 5.0), diameter=thin, top_depth=h),
        TendonSegment((half, -10.0), (1.5, 5.0), diameter=thin, top_depth=h),
        TendonSegment((0.0, 0.0), (0.0, 99.0), diameter=thick, top_depth=h),
    )


def _uniform():
    return (TendonSegment((0.0, -99.0), (0.0, 99.0), diameter=4.0, top_depth=2.0),)


_BUILDERS = {
    ExperimentId.EXP1: _exp1,
    ExperimentId.EXP2: _exp2,
    ExperimentId.EXP3: _exp3,
    ExperimentId.EXP4: _exp4,
    ExperimentId.UNIFORM: _uniform,
}


def preset(experiment_id) -> PhantomSpec:
    """Canonical PhantomSpec for an experiment id."""
    eid = parse_experiment_id(experiment_id)
    return PhantomSpec(tendons=_BUILDERS[eid]())
