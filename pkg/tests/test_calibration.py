# -*- coding: utf-8 -*-
import numpy as np
import pytest

from src.calibration.calibrate import (assign_splits, collect_calibration_data, held_out_rmse,
                                       load_model, new_calibration_model, predict, predict_array,
                                       save_model, train)
from src.calibration.mlp import TrainConfig, grad_check, init_mlp, model_from_dict, model_to_dict
from src.contact.contact import Wrench
from src.phantom.presets import ExperimentId
from src.sensors.raw_channels import MixingModel, RawChannels, RawSensor
from src.sensors.tactile import SensorNoiseModel
from src.utils.errors import ShapeMismatchError

CALIBRATION_WIDTHS = [12, 64, 64, 64, 64, 6]
GRAD_TOL = 1e-4
DESK_POINTS = 3343


def _random_batch(rng, n, widths):
    return rng.normal(size=(n, widths[0])), rng.normal(size=(n, widths[-1]))


@pytest.mark.parametrize("output", ["identity", "logistic"])
def test_grad_check_on_fresh_models(output):
    rng = np.random.default_rng(0)
    for seed in range(20):
        widths = CALIBRATION_WIDTHS if output == "identity" else [20, 16, 1]
        model = init_mlp(widths, seed=seed, output=output)
        X, Y = _random_batch(rng, 4, widths)
        if output == "logistic":
            Y = (Y > 0).astype(float)
        assert grad_check(model, X, Y, seed=seed) < GRAD_TOL


def test_zero_loss_sample_has_zero_gradient():
    model = init_mlp(CALIBRATION_WIDTHS, seed=1)
    X = np.random.default_rng(1).normal(size=(1, 12))
    Y, _ = model.forward(X)
    loss, grads = model.loss_and_grads(X, Y)
    assert loss == 0.0
    for gW, gb in grads:
        assert np.all(gW == 0.0) and np.all(gb == 0.0)


def test_duplicated_sample_doubles_summed_gradient():
    model = init_mlp(CALIBRATION_WIDTHS, seed=2)
    X, Y = _random_batch(np.random.default_rng(2), 1, CALIBRATION_WIDTHS)
    loss1, g1 = model.loss_and_grads(X, Y, reduction="sum")
    loss2, g2 = model.loss_and_grads(np.vstack([X, X]), np.vstack([Y, Y]), reduction="sum")
    assert loss2 == pytest.approx(2 * loss1)
    for (a, _), (b, _) in zip(g1, g2):
        np.testing.assert_allclose(b, 2 * a, rtol=1e-12, atol=1e-15)


def test_forward_rejects_wrong_width():
    with pytest.raises(ShapeMismatchError):
        init_mlp(CALIBRATION_WIDTHS).forward(np.zeros((3, 11)))


def test_split_proportions():
    split = assign_splits(1000, np.random.default_rng(0))
    assert [int(np.sum(split == s)) for s in ("train", "test", "validation")] == [700, 200, 100]


@pytest.fixture(scope="module")
def small_dataset(presets):
    return collect_calibration_data(presets[ExperimentId.UNIFORM], n_points=200, seed=4)


def test_collection_rejects_too_few_points(presets):
    with pytest.raises(ValueError):
        collect_calibration_data(presets[ExperimentId.UNIFORM], n_points=99)


def test_zero_indentation_samples_have_zero_wrench(small_dataset):
    zero = small_dataset.kind == "zero"
    assert zero.sum() == 10
    assert np.all(small_dataset.wrench[zero] == 0.0)
    assert np.all(small_dataset.wrench[~zero, 2] > 0.0)


def test_identical_seed_gives_identical_dataset(presets, small_dataset):
    again = collect_calibration_data(presets[ExperimentId.UNIFORM], n_points=200, seed=4)
    np.testing.assert_array_equal(again.raw, small_dataset.raw)
    np.testing.assert_array_equal(again.wrench, small_dataset.wrench)
    np.testing.assert_array_equal(again.split, small_dataset.split)


def test_zero_epochs_leaves_model_unchanged(small_dataset):
    model = new_calibration_model(12, seed=0)
    trained, history = train(model, small_dataset, TrainConfig(epochs=0))
    assert len(history["train_loss"]) == 1
    for a, b in zip(model.weights, trained.weights):
        np.testing.assert_array_equal(a, b)


def test_best_validation_loss_is_non_increasing(small_dataset):
    _, history = train(new_calibration_model(12), small_dataset, TrainConfig(epochs=15))
    assert np.all(np.diff(history["best_val_loss"]) <= 0)
    assert history["train_loss"][-1] < history["train_loss"][0]


def test_scalers_fit_on_training_split_only(small_dataset):
    trained, _ = train(new_calibration_model(12), small_dataset, TrainConfig(epochs=1))
    X_train, _ = small_dataset.subset("train")
    np.testing.assert_allclose(trained.x_scaler.mean_, X_train.mean(axis=0))


def test_standardization_round_trip(small_dataset):
    trained, _ = train(new_calibration_model(12), small_dataset, TrainConfig(epochs=1))
    X, Y = small_dataset.raw, small_dataset.wrench
    np.testing.assert_allclose(trained.x_scaler.inverse_transform(trained.x_scaler.transform(X)), X,
                               rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(trained.y_scaler.inverse_transform(trained.y_scaler.transform(Y)), Y,
                               rtol=1e-12, atol=1e-9)


def test_seeded_training_repeats_loss_history(small_dataset):
    cfg = TrainConfig(epochs=5, seed=3)
    a, history_a = train(new_calibration_model(12, seed=2), small_dataset, cfg)
    b, history_b = train(new_calibration_model(12, seed=2), small_dataset, cfg)
    assert history_a == history_b
    for wa, wb in zip(a.weights, b.weights):
        np.testing.assert_array_equal(wa, wb)


def test_training_residuals_sit_under_their_95th_percentile(small_dataset):
    trained, _ = train(new_calibration_model(12), small_dataset, TrainConfig(epochs=20, learning_rate=5e-3))
    X, Y = small_dataset.subset("train")
    residuals = np.array([np.linalg.norm(predict(trained, RawChannels(x)).as_array()[:3] - y[:3])
                          for x, y in zip(X, Y)])
    p95 = np.percentile(residuals, 95)
    assert np.mean(residuals <= p95) >= 0.94
    assert np.median(residuals) < p95
    batch = np.linalg.norm(predict_array(trained, X)[:, :3] - Y[:, :3], axis=1)
    np.testing.assert_allclose(residuals, batch, rtol=1e-9, atol=1e-9)


def test_predict_is_deterministic_and_checks_shape(small_dataset, tmp_path):
    trained, _ = train(new_calibration_model(12), small_dataset, TrainConfig(epochs=2))
    raw = RawChannels(small_dataset.raw[0], t=0.5)
    a, b = predict(trained, raw), predict(trained, raw)
    assert a == b and a.t == 0.5
    with pytest.raises(ShapeMismatchError):
        predict(trained, RawChannels(np.zeros(8)))

    path = tmp_path / "model.json"
    save_model(trained, str(path))
    np.testing.assert_array_equal(predict_array(load_model(str(path)), small_dataset.raw),
                                  predict_array(trained, small_dataset.raw))


def test_model_file_version_is_checked():
    payload = model_to_dict(init_mlp([4, 3, 2]))
    payload["version"] = 99
    with pytest.raises(ValueError, match="version"):
        model_from_dict(payload)


@pytest.mark.slow
def test_linear_noise_free_calibration_is_accurate(presets):
    sensor = RawSensor(MixingModel().linear_only(), SensorNoiseModel.noiseless(saturation_moment=0.0))
    data = collect_calibration_data(presets[ExperimentId.UNIFORM], DESK_POINTS, seed=1, sensor=sensor)
    assert data.counts() == {"train": 2340, "test": 669, "validation": 334}
    model, _ = train(new_calibration_model(12, seed=1), data, TrainConfig(epochs=200, learning_rate=5e-3))
    assert held_out_rmse(model, data)["force_rmse_pct_range"] < 1.0

    baseline = predict(model, sensor.read(Wrench()))
    assert np.linalg.norm(baseline.as_array()[:3]) < 0.5