# -*- coding: utf-8 -*-
"""
src/calibration/calibrate.py

Task-specific F/T calibration: collects poking / sliding / rolling interactions on
a phantom, trains the 5-weight-layer MLP from raw channels to the 6-axis wrench
with an MSE loss, and evaluates it on held-out data.
"""

import os
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from sklearn.preprocessing import StandardScaler

from src.calibration.mlp import (HIDDEN_WIDTHS, MLPModel, TrainConfig, fit_mlp, grad_check,
                                 init_mlp, model_from_dict, model_to_dict)
from src.contact.contact import COMPONENTS, ContactConfig, ToolPose, Wrench, simulate_contact
from src.phantom.phantom import Phantom
from src.sensors.raw_channels import RawChannels, RawSensor
from src.utils.errors import ShapeMismatchError
from src.utils.io import get_logger, read_json, write_csv, write_json

logger = get_logger(__name__)

# --- 1. CONFIGURATION ---
MIN_POINTS = 100
DESK_SCALE_POINTS = 3343          # 33434 / 10
SPLIT_FRACTIONS = {"train": 0.7, "test": 0.2, "validation": 0.1}
COLLECTION_PITCH_MM = 1.0
ROLL_OFFSET_MM = 8.0
KIND_SHARES = (("zero", 0.05), ("poke", 0.40), ("slide", 0.30), ("roll", 0.25))


@dataclass
class CalibDataset:
    raw: np.ndarray        # (n, C)
    wrench: np.ndarray     # (n, 6)
    kind: np.ndarray       # poke / slide / roll / zero
    split: np.ndarray      # train / test / validation

    def __len__(self) -> int:
        return len(self.raw)

    def subset(self, split: str) -> Tuple[np.ndarray, np.ndarray]:
        mask = self.split == split
        return self.raw[mask], self.wrench[mask]

    def counts(self) -> Dict[str, int]:
        return {name: int(np.sum(self.split == name)) for name in SPLIT_FRACTIONS}

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.raw, columns=[f"c{i}" for i in range(self.raw.shape[1])])
        for j, name in enumerate(COMPONENTS):
            df[name] = self.wrench[:, j]
        df["kind"] = self.kind
        df["split"] = self.split
        return df


def assign_splits(n: int, rng: np.random.Generator) -> np.ndarray:
    """70/20/10 assignment by seeded shuffle."""
    n_train = int(round(SPLIT_FRACTIONS["train"] * n))
    n_test = int(round(SPLIT_FRACTIONS["test"] * n))
    labels = np.array(["train"] * n_train + ["test"] * n_test
                      + ["validation"] * (n - n_train - n_test))
    split = np.empty(n, dtype=object)
    split[rng.permutation(n)] = labels
    return split.astype(str)


# --- 2. DATA COLLECTION ---

def collect_calibration_data(phantom: Phantom, n_points: int = DESK_SCALE_POINTS, seed: int = 0,
                             sensor: Optional[RawSensor] = None,
                             contact_cfg: Optional[ContactConfig] = None) -> CalibDataset:
    """Randomised pokes, constant-depth slides and offset-centre rolls under pressure."""
    if n_points < MIN_POINTS:
        raise ValueError(f"n_points must be >= {MIN_POINTS}, got {n_points}")
    rng = np.random.default_rng(seed)
    sensor = sensor or RawSensor()
    contact_cfg = contact_cfg or ContactConfig(pitch=COLLECTION_PITCH_MM)
    R = contact_cfg.dome.radius
    max_depth = 0.95 * contact_cfg.dome.max_indentation
    reach = np.sqrt(2 * R * contact_cfg.dome.max_indentation) + 1.0
    (x0, x1), (y0, y1) = phantom.spec.x_bounds, phantom.spec.y_bounds
    x_lo, x_hi = min(x0 + reach, 0.5 * (x0 + x1)), max(x1 - reach, 0.5 * (x0 + x1))
    y_lo, y_hi = min(y0 + reach, 0.5 * (y0 + y1)), max(y1 - reach, 0.5 * (y0 + y1))

    counts = [int(round(share * n_points)) for _, share in KIND_SHARES]
    counts[1] += n_points - sum(counts)
    kinds = np.array([name for (name, _), c in zip(KIND_SHARES, counts) for _ in range(c)])
    kinds = kinds[rng.permutation(n_points)]

    raw = np.zeros((n_points, sensor.n_channels))
    wrench = np.zeros((n_points, 6))
    for i, kind in enumerate(kinds):
        x, y = rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi)
        depth = rng.uniform(0.5, max_depth)
        velocity, ref = (0.0, 0.0), None
        if kind == "zero":
            depth = -0.5
        elif kind == "slide":
            heading = rng.uniform(0, 2 * np.pi)
            speed = rng.uniform(5.0, 40.0)
            velocity = (speed * np.cos(heading), speed * np.sin(heading))
        elif kind == "roll":
            r, ang = ROLL_OFFSET_MM * np.sqrt(rng.uniform()), rng.uniform(0, 2 * np.pi)
            ref = (x - r * np.cos(ang), y - r * np.sin(ang))
        pose = ToolPose(x, y, -depth, velocity_xy=velocity)
        _, w = simulate_contact(phantom, pose, contact_cfg, reference_xy=ref)
        wrench[i] = w.as_array()
        raw[i] = sensor.read(w).channels

    split = assign_splits(n_points, rng)
    logger.info(f"Collected {n_points} calibration points "
                f"({', '.join(f'{k}={v}' for k, v in zip([k for k, _ in KIND_SHARES], counts))})")
    return CalibDataset(raw, wrench, kinds, split)


# --- 3. TRAINING AND PREDICTION ---

def new_calibration_model(n_channels: int, seed: int = 0, hidden=HIDDEN_WIDTHS) -> MLPModel:
    return init_mlp([n_channels, *hidden, 6], seed=seed, output="identity")


def train(model: MLPModel, data: CalibDataset, cfg: TrainConfig) -> Tuple[MLPModel, Dict]:
    """Standardizes with training-split statistics only and fits with MSE."""
    X_tr, Y_tr = data.subset("train")
    X_val, Y_val = data.subset("validation")
    if len(X_tr) == 0:
        raise ValueError("calibration dataset has no training samples")
    if X_tr.shape[1] != model.widths[0]:
        raise ShapeMismatchError(f"model expects {model.widths[0]} channels, data has {X_tr.shape[1]}")
    if len(X_val) == 0:
        X_val, Y_val = X_tr, Y_tr

    model = model.copy()
    model.x_scaler = StandardScaler().fit(X_tr)
    model.y_scaler = StandardScaler().fit(Y_tr)
    history = fit_mlp(model,
                      model.x_scaler.transform(X_tr), model.y_scaler.transform(Y_tr),
                      model.x_scaler.transform(X_val), model.y_scaler.transform(Y_val), cfg)
    logger.info(f"Training finished: train loss {history['train_loss'][-1]:.5f}, "
                f"best validation loss {history['best_val_loss'][-1]:.5f}")
    return model, history


def predict_array(model: MLPModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.widths[0]:
        raise ShapeMismatchError(f"model expects {model.widths[0]} channels, got {X.shape[1]}")
    Xs = model.x_scaler.transform(X) if model.x_scaler is not None else X
    out = model.predict_standardized(Xs)
    return model.y_scaler.inverse_transform(out) if model.y_scaler is not None else out


def predict(model: MLPModel, raw: RawChannels) -> Wrench:
    channels = np.asarray(raw.channels, dtype=float)
    if channels.shape != (model.widths[0],):
        raise ShapeMismatchError(f"model expects {model.widths[0]} channels, got {channels.shape}")
    return Wrench.from_array(predict_array(model, channels[None, :])[0], t=raw.t)


def calibration_grad_check(model: MLPModel, data: CalibDataset, n_samples: int = 8, seed: int = 0) -> float:
    X, Y = data.subset("train")
    X, Y = X[:n_samples], Y[:n_samples]
    if model.x_scaler is not None:
        X = model.x_scaler.transform(X)
    if model.y_scaler is not None:
        Y = model.y_scaler.transform(Y)
    return grad_check(model, X, Y, seed=seed)


# --- 4. EVALUATION ---

def force_range(data: CalibDataset) -> float:
    forces = data.wrench[:, :3]
    return float(forces.max() - forces.min())


def held_out_rmse(model: MLPModel, data: CalibDataset, split: str = "test") -> Dict[str, float]:
    X, Y = data.subset(split)
    err = predict_array(model, X) - Y
    per = np.sqrt(np.mean(err ** 2, axis=0))
    result = {name: float(v) for name, v in zip(COMPONENTS, per)}
    force_rmse = float(np.sqrt(np.mean(err[:, :3] ** 2)))
    result["force_rmse"] = force_rmse
    result["force_rmse_pct_range"] = 100.0 * force_rmse / force_range(data)
    return result


def calibration_report(model: MLPModel, data: CalibDataset, history: Dict, grad_error: float) -> dict:
    return {
        "points": len(data),
        "splits": data.counts(),
        "test_rmse": held_out_rmse(model, data, "test"),
        "validation_rmse": held_out_rmse(model, data, "validation"),
        "grad_check_max_rel_error": grad_error,
        "final_train_loss": history["train_loss"][-1],
        "best_val_loss": history["best_val_loss"][-1],
        "epochs": len(history["train_loss"]) - 1,
    }


# --- 5. PERSISTENCE ---

def save_model(model: MLPModel, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    return write_json(model_to_dict(model), path)


def load_model(path: str) -> MLPModel:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Model file not found: {path}. Run `palp-bench calibrate` first.")
    return model_from_dict(read_json(path))


def save_dataset(data: CalibDataset, path: str) -> str:
    return write_csv(data.to_frame(), path)


def save_loss_curves(history: Dict, path: str) -> str:
    df = pd.DataFrame({"epoch": np.arange(len(history["train_loss"])), **history})
    return write_csv(df, path)
