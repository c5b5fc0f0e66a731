# -*- coding: utf-8 -*-
import numpy as np
import pytest

from src.contact.contact import (ContactConfig, DomeGeometry, ToolPose, closed_form_sphere_force,
                                 contact_area, contact_wrench, indentation_field, simulate_contact)
from src.phantom.phantom import build_phantom, translate_spec
from src.phantom.presets import ExperimentId, preset
from src.utils.errors import SimulationFault

N_ORACLE_CASES = 50


def test_touching_surface_is_empty_contact(make_flat):
    phantom = make_flat()
    patch = indentation_field(DomeGeometry(20.0), ToolPose(0.0, 0.0, 0.0), phantom)
    assert patch.empty
    assert contact_area(patch) == 0.0
    w = contact_wrench(patch, phantom, ToolPose(0.0, 0.0, 0.0))
    assert np.all(w.as_array() == 0.0)


def test_contact_radius_example(make_flat):
    patch = indentation_field(DomeGeometry(20.0), ToolPose(0.0, 0.0, -5.0), make_flat())
    assert patch.contact_radius == pytest.approx(np.sqrt(200.0))


def test_contact_area_matches_disc(make_flat):
    patch = indentation_field(DomeGeometry(20.0), ToolPose(0.0, 0.0, -5.0), make_flat(), pitch=0.25)
    assert contact_area(patch) == pytest.approx(np.pi * 200.0, rel=0.02)


def test_indentation_beyond_cap_limit_faults(make_flat):
    with pytest.raises(SimulationFault, match="R/4"):
        indentation_field(DomeGeometry(20.0), ToolPose(0.0, 0.0, -5.01), make_flat())


def test_closed_form_examples():
    assert closed_form_sphere_force(1e6, 0.02, 0.005) == pytest.approx(1.5708, abs=1e-4)
    assert closed_form_sphere_force(1e6, 0.02, 0.0) == 0.0
    assert closed_form_sphere_force(3e6, 0.04, 0.004) == pytest.approx(
        4 * closed_form_sphere_force(3e6, 0.04, 0.002))


def test_grid_force_example(make_flat):
    cfg = ContactConfig(dome=DomeGeometry(20.0), pitch=0.25)
    _, w = simulate_contact(make_flat(1e6), ToolPose(0.0, 0.0, -5.0), cfg)
    assert w.Fz == pytest.approx(1.5708, rel=0.01)


@pytest.mark.parametrize("pitch, tol", [(0.25, 0.01), (0.1, 0.0025)])
def test_grid_integration_oracle(make_flat, pitch, tol):
    rng = np.random.default_rng(42)
    for _ in range(N_ORACLE_CASES):
        k = rng.uniform(5e5, 5e6)
        R = rng.uniform(10.0, 60.0)
        d = rng.uniform(1.0, 0.999 * R / 4)
        cfg = ContactConfig(dome=DomeGeometry(R), pitch=pitch)
        _, w = simulate_contact(make_flat(k), ToolPose(0.0, 0.0, -d), cfg)
        assert w.Fz == pytest.approx(closed_form_sphere_force(k, R * 1e-3, d * 1e-3), rel=tol)


def test_doubling_stiffness_doubles_normal_force(make_flat):
    cfg = ContactConfig(dome=DomeGeometry(30.0), pitch=0.5)
    pose = ToolPose(3.0, -10.0, -4.0)
    _, w1 = simulate_contact(make_flat(1e6), pose, cfg)
    _, w2 = simulate_contact(make_flat(2e6), pose, cfg)
    assert w2.Fz == pytest.approx(2 * w1.Fz, rel=1e-12)


def test_static_contact_has_no_lateral_force(presets):
    _, w = simulate_contact(presets[ExperimentId.EXP1], ToolPose(0.0, -40.0, -6.0),
                            ContactConfig(pitch=1.0))
    assert w.Fx == 0.0 and w.Fy == 0.0 and w.Tz == 0.0


def test_sliding_force_opposes_motion_and_exceeds_friction(presets):
    phantom = presets[ExperimentId.UNIFORM]
    _, w = simulate_contact(phantom, ToolPose(0.0, 0.0, -6.0, velocity_xy=(0.0, 20.0)),
                            ContactConfig(pitch=1.0))
    assert w.Fy < 0.0
    assert abs(w.Fx) < 1e-9
    assert abs(w.Fy) > phantom.spec.surface_friction * w.Fz


def test_lever_moment_from_lateral_force(presets):
    cfg = ContactConfig(pitch=1.0)
    _, w = simulate_contact(presets[ExperimentId.UNIFORM], ToolPose(0.0, 0.0, -6.0, velocity_xy=(0.0, 20.0)), cfg)
    # Fz is symmetric about the axis, so Tx is the lever term alone
    assert w.Tx == pytest.approx(cfg.sensor_lever * w.Fy, rel=1e-6)


def test_offset_reference_point_adds_moment(make_flat):
    cfg = ContactConfig(pitch=0.5)
    pose = ToolPose(0.0, 0.0, -5.0)
    _, centred = simulate_contact(make_flat(), pose, cfg)
    _, rolled = simulate_contact(make_flat(), pose, cfg, reference_xy=(0.0, -4.0))
    assert abs(centred.Tx) < 1e-9
    assert rolled.Tx == pytest.approx(4.0 * rolled.Fz, rel=1e-9)


def test_pose_time_must_be_non_negative():
    with pytest.raises(ValueError):
        ToolPose(0.0, 0.0, 0.0, t=-1.0)


def test_lateral_force_bounded_by_friction_and_ploughing(presets):
    rng = np.random.default_rng(7)
    cfg = ContactConfig(pitch=1.0)
    for _ in range(40):
        phantom = presets[list(ExperimentId)[rng.integers(len(ExperimentId))]]
        heading = rng.uniform(0.0, 2 * np.pi)
        speed = rng.uniform(1.0, 40.0)
        pose = ToolPose(rng.uniform(-20.0, 20.0), rng.uniform(-70.0, 70.0), -rng.uniform(0.5, 12.0),
                        velocity_xy=(speed * np.cos(heading), speed * np.sin(heading)))
        patch, w = simulate_contact(phantom, pose, cfg)
        max_slope = patch.contact_radius / patch.dome_radius
        bound = phantom.spec.surface_friction * w.Fz + cfg.ploughing_coeff * w.Fz * max_slope
        assert np.hypot(w.Fx, w.Fy) <= bound * (1 + 1e-12)


@pytest.mark.parametrize("eid", [ExperimentId.EXP3, ExperimentId.EXP4])
def test_wrench_invariant_under_rigid_translation(eid):
    dx, dy = 7.25, -12.5
    moved = build_phantom(translate_spec(preset(eid), dx, dy))
    original = build_phantom(preset(eid))
    cfg = ContactConfig(pitch=1.0)
    cases = [(0.0, -40.0, -8.0, (0.0, 20.0)), (3.0, 10.0, -5.0, (-5.0, 12.0)), (-2.0, 55.0, -10.0, (0.0, 0.0))]
    for x, y, z, v in cases:
        _, a = simulate_contact(original, ToolPose(x, y, z, velocity_xy=v), cfg)
        _, b = simulate_contact(moved, ToolPose(x + dx, y + dy, z, velocity_xy=v), cfg)
        np.testing.assert_allclose(b.as_array(), a.as_array(), rtol=1e-9, atol=1e-9)
