# -*- coding: utf-8 -*-
import numpy as np
import pytest

from src.contact.contact import ContactConfig, ToolPose, Wrench, indentation_field, simulate_contact
from src.detection.features import ridge_count
from src.phantom.presets import ExperimentId
from src.sensors.raw_channels import MixingModel, RawSensor, raw_from_wrench, soft_clip
from src.sensors.stream import sample_times, stream
from src.sensors.tactile import (SensorNoiseModel, TactileCamera, TactileConfig, render_tactile,
                                 vignette)
from src.utils.errors import SpecValidationError, TraceError

NOISE_SD = 0.005
RESOLUTION = 64


def test_empty_patch_renders_vignetted_background(make_flat):
    patch = indentation_field(ContactConfig().dome, ToolPose(0.0, 0.0, 1.0), make_flat())
    noise = SensorNoiseModel(image_noise_sd=NOISE_SD, seed=3)
    img = render_tactile(patch, RESOLUTION, noise)
    cfg = TactileConfig()
    expected = cfg.background * vignette(cfg, RESOLUTION)
    tol = 3 * NOISE_SD / np.sqrt(RESOLUTION ** 2)
    assert abs(img.intensities.mean() - expected.mean()) < tol


def test_same_seed_renders_identical_images(presets):
    patch = indentation_field(ContactConfig().dome, ToolPose(0.0, -30.0, -8.0), presets[ExperimentId.EXP1], 1.0)
    noise = SensorNoiseModel(seed=11)
    a = render_tactile(patch, RESOLUTION, noise)
    b = render_tactile(patch, RESOLUTION, noise)
    np.testing.assert_array_equal(a.intensities, b.intensities)


def test_intensity_strictly_increases_over_depth_sweep(make_flat):
    dome = ContactConfig().dome
    noise = SensorNoiseModel.noiseless()
    means = [render_tactile(indentation_field(dome, ToolPose(0.0, 0.0, -d), make_flat(), 1.0),
                            noise=noise).intensities.mean()
             for d in np.linspace(0.5, 12.0, 24)]
    assert np.all(np.diff(means) > 0)



def test_resolution_floor():
    with pytest.raises(ValueError):
        render_tactile(None, resolution=8)


@pytest.mark.parametrize("y, ridges", [(-45.0, 2), (40.0, 1)])
def test_exp4_cross_profile_ridges(presets, y, ridges):
    patch = indentation_field(ContactConfig().dome, ToolPose(0.0, y, -10.0), presets[ExperimentId.EXP4], 1.0)
    img = TactileCamera(SensorNoiseModel(seed=5)).capture(patch)
    assert ridge_count(img) == ridges


def test_zero_wrench_gives_offsets():
    mixing = MixingModel()
    raw = raw_from_wrench(Wrench(), mixing, SensorNoiseModel.noiseless())
    np.testing.assert_array_equal(raw.channels, mixing.offsets)


def test_linear_regime_channel_difference():
    mixing = MixingModel().linear_only()
    noise = SensorNoiseModel.noiseless()
    a = raw_from_wrench(Wrench(Fz=10.0, Tz=50.0), mixing, noise).channels
    b = raw_from_wrench(Wrench(Fz=10.0, Tz=150.0), mixing, noise).channels
    np.testing.assert_allclose(b - a, mixing.matrix[:, 5] * 100.0 / mixing.moment_scale, atol=1e-12)


def test_moment_soft_clip_is_monotone_and_bounded():
    m = np.linspace(-3000.0, 3000.0, 601)
    clipped = soft_clip(m, 500.0)
    assert np.all(np.diff(clipped) > 0)
    assert np.max(np.abs(clipped)) < 750.0
    np.testing.assert_array_equal(soft_clip(np.array([120.0, -499.0]), 500.0), [120.0, -499.0])


def _linear_inverse(mixing, channels):
    w_hat, *_ = np.linalg.lstsq(mixing.matrix, channels - mixing.offsets, rcond=None)
    return w_hat * mixing.scales


def test_moment_saturation_breaks_linear_calibration():
    mixing = MixingModel().linear_only()
    noise = SensorNoiseModel.noiseless(saturation_moment=500.0)
    torques = np.linspace(100.0, 1000.0, 19)
    readings = [raw_from_wrench(Wrench(Fz=20.0, Tz=tz), mixing, noise).channels for tz in torques]
    errors = np.array([abs(_linear_inverse(mixing, c)[5] - tz) for c, tz in zip(readings, torques)])
    in_range = errors[torques <= 500.0]
    assert np.all(in_range < 1e-9)
    out_of_range = errors[torques > 500.0]
    assert np.all(np.diff(out_of_range) > 0)
    assert errors[-1] > 100.0


def test_mixing_needs_enough_channels():
    with pytest.raises(SpecValidationError):
        MixingModel(n_channels=6)


def test_drift_grows_with_time():
    mixing = MixingModel()
    noise = SensorNoiseModel(channel_noise_sd=0.0, drift_rate=1e-3)
    early = raw_from_wrench(Wrench(t=0.0), mixing, noise).channels
    late = raw_from_wrench(Wrench(t=10.0), mixing, noise).channels
    np.testing.assert_allclose(late - early, 1e-2 * mixing.drift_direction, atol=1e-12)


def _ramp(t1=1.0, f0=0.0, f1=10.0):
    return [(ToolPose(0.0, 0.0, -1.0, t=0.0), Wrench(Fz=f0, t=0.0)),
            (ToolPose(0.0, 0.0, -1.0, t=t1), Wrench(Fz=f1, t=t1))]


def test_one_second_stream_has_301_samples():
    assert len(sample_times(0.0, 1.0, 300.0)) == 301
    s = stream(_ramp(), RawSensor(noise=SensorNoiseModel.noiseless()))
    assert s.raw.shape == (301, 12)
    assert list(s.to_frame().columns[:2]) == ["t", "c0"]


def test_ramp_midpoint_is_exact_average():
    s = stream(_ramp(), RawSensor(noise=SensorNoiseModel.noiseless()))
    assert s.times[150] == 0.5
    assert s.wrenches[150, 2] == 5.0


def test_constant_wrench_gives_constant_channels():
    s = stream(_ramp(f0=7.0, f1=7.0), RawSensor(noise=SensorNoiseModel.noiseless()))
    np.testing.assert_allclose(s.raw, np.broadcast_to(s.raw[0], s.raw.shape), atol=1e-12)


def test_stream_rejects_non_increasing_time():
    traj = _ramp()
    with pytest.raises(TraceError):
        stream([traj[1], traj[0]], RawSensor())


def test_stream_emits_frames_at_frame_rate(presets):
    phantom = presets[ExperimentId.UNIFORM]
    camera = TactileCamera(SensorNoiseModel.noiseless())
    cfg = ContactConfig(pitch=1.0)
    s = stream(_ramp(), RawSensor(noise=SensorNoiseModel.noiseless()),
               frame_source=lambda pose: camera.capture(simulate_contact(phantom, pose, cfg)[0], pose.t))
    assert len(s.frames) == 31
    assert s.frames[-1].t == pytest.approx(1.0)
