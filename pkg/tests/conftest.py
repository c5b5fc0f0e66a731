# -*- coding: utf-8 -*-
"""Shared fixtures: phantoms are immutable, so expensive ones are session-scoped."""

import pytest

from src.phantom.phantom import MaterialParams, PhantomSpec, build_phantom
from src.phantom.presets import ExperimentId, preset


def flat_phantom(k: float = 2e6):
    """Tendon-free block with foundation stiffness k (N/m^3)."""
    return build_phantom(PhantomSpec(substrate=MaterialParams(60e3, k)))


@pytest.fixture(scope="session")
def presets():
    return {eid: build_phantom(preset(eid)) for eid in ExperimentId}


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("PALP_BENCH_OUT", str(tmp_path / "runs"))
    return tmp_path / "runs"


@pytest.fixture
def make_flat():
    return flat_phantom
