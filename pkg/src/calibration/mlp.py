# -*- coding: utf-8 -*-
"""
src/calibration/mlp.py

Dense tanh network with explicit backpropagation, used both as the wrench
calibration regressor (identity output, MSE loss) and as the detection heads
(logistic output, binary cross-entropy). Parameters are plain numpy arrays so the
analytic gradients can be checked against finite differences.
"""

import copy
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.preprocessing import StandardScaler

from src.utils.errors import ShapeMismatchError, SimulationFault
from src.utils.io import get_logger

logger = get_logger(__name__)

MODEL_FORMAT = "palp-mlp"
MODEL_VERSION = 1
HIDDEN_WIDTHS = (64, 64, 64, 64)


# --- 1. MODEL ---

class MLPModel:
    def __init__(self, widths: Sequence[int], weights: List[np.ndarray], biases: List[np.ndarray],
                 output: str = "identity"):
        if output not in ("identity", "logistic"):
            raise ValueError(f"unknown output '{output}'")
        self.widths = [int(w) for w in widths]
        self.weights = weights
        self.biases = biases
        self.output = output
        self.x_scaler: Optional[StandardScaler] = None
        self.y_scaler: Optional[StandardScaler] = None
        self._check_shapes()

    def _check_shapes(self) -> None:
        if len(self.weights) != len(self.widths) - 1 or len(self.biases) != len(self.weights):
            raise ShapeMismatchError("layer count does not match the width chain")
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape != (self.widths[i], self.widths[i + 1]) or b.shape != (self.widths[i + 1],):
                raise ShapeMismatchError(f"layer {i}: weight {W.shape} / bias {b.shape} break the chain")

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def loss_kind(self) -> str:
        return "mse" if self.output == "identity" else "bce"

    def copy(self) -> "MLPModel":
        return copy.deepcopy(self)

    def parameters(self) -> List[np.ndarray]:
        return [p for pair in zip(self.weights, self.biases) for p in pair]

    # --- forward / backward ---

    def forward(self, X: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        """Returns pre-output values (logits for the logistic head) and layer activations."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.widths[0]:
            raise ShapeMismatchError(f"expected input width {self.widths[0]}, got {X.shape}")
        acts = [X]
        a = X
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W + b
            a = np.tanh(z) if i < self.n_layers - 1 else z
            acts.append(a)
        return a, acts

    def loss_and_grads(self, X: np.ndarray, Y: np.ndarray, reduction: str = "mean"
                       ) -> Tuple[float, List[Tuple[np.ndarray, np.ndarray]]]:
        out, acts = self.forward(X)
        Y = np.asarray(Y, dtype=float).reshape(out.shape)
        n = out.shape[0]
        if self.loss_kind == "mse":
            resid = out - Y
            norm = resid.size if reduction == "mean" else 1.0
            loss = float(np.sum(resid ** 2) / norm)
            delta = 2.0 * resid / norm
        else:
            norm = n if reduction == "mean" else 1.0
            loss = float(np.sum(np.logaddexp(0.0, out) - Y * out) / norm)
            delta = (sigmoid(out) - Y) / norm

        grads = [None] * self.n_layers
        for i in range(self.n_layers - 1, -1, -1):
            grads[i] = (acts[i].T @ delta, delta.sum(axis=0))
            if i > 0:
                delta = (delta @ self.weights[i].T) * (1.0 - acts[i] ** 2)
        return loss, grads

    def loss(self, X: np.ndarray, Y: np.ndarray, reduction: str = "mean") -> float:
        out, _ = self.forward(X)
        Y = np.asarray(Y, dtype=float).reshape(out.shape)
        if self.loss_kind == "mse":
            norm = out.size if reduction == "mean" else 1.0
            return float(np.sum((out - Y) ** 2) / norm)
        norm = out.shape[0] if reduction == "mean" else 1.0
        return float(np.sum(np.logaddexp(0.0, out) - Y * out) / norm)

    def predict_standardized(self, X: np.ndarray) -> np.ndarray:
        out, _ = self.forward(X)
        return sigmoid(out) if self.output == "logistic" else out


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def init_mlp(widths: Sequence[int], seed: int = 0, output: str = "identity") -> MLPModel:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, (fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MLPModel(widths, weights, biases, output)


# --- 2. OPTIMISATION ---

@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 1e-3
    batch_size: int = 64
    momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not self.learning_rate > 0 or not self.batch_size > 0:
            raise ValueError("learning_rate and batch_size must be > 0")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")


def fit_mlp(model: MLPModel, X: np.ndarray, Y: np.ndarray, X_val: np.ndarray, Y_val: np.ndarray,
            cfg: TrainConfig) -> Dict[str, List[float]]:
    """Mini-batch gradient descent with momentum on already-scaled arrays.

    Keeps the best-validation parameters; no early stopping.
    """
    if len(X) == 0:
        raise ValueError("training split is empty")
    rng = np.random.default_rng(cfg.seed)
    velocity = [(np.zeros_like(W), np.zeros_like(b)) for W, b in zip(model.weights, model.biases)]
    history = {"train_loss": [model.loss(X, Y)], "val_loss": [model.loss(X_val, Y_val)]}
    history["best_val_loss"] = [history["val_loss"][0]]
    best = (copy.deepcopy(model.weights), copy.deepcopy(model.biases))

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(X))
        for start in range(0, len(X), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _, grads = model.loss_and_grads(X[idx], Y[idx])
            for i, (gW, gb) in enumerate(grads):
                vW, vb = velocity[i]
                vW *= cfg.momentum
                vW -= cfg.learning_rate * gW
                vb *= cfg.momentum
                vb -= cfg.learning_rate * gb
                model.weights[i] += vW
                model.biases[i] += vb

        train_loss, val_loss = model.loss(X, Y), model.loss(X_val, Y_val)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise SimulationFault(f"training diverged at epoch {epoch + 1}: "
                                  f"train loss {train_loss}, validation loss {val_loss}")
        history["train_loss"].append(train_loss)
        history["val_loss"].append(val_loss)
        if val_loss < history["best_val_loss"][-1]:
            best = (copy.deepcopy(model.weights), copy.deepcopy(model.biases))
        history["best_val_loss"].append(min(val_loss, history["best_val_loss"][-1]))
        if (epoch + 1) % 50 == 0:
            logger.debug(f"epoch {epoch + 1}: train {train_loss:.5f}, val {val_loss:.5f}")

    model.weights, model.biases = best
    return history


# --- 3. GRADIENT VERIFICATION ---

def grad_check(model: MLPModel, X: np.ndarray, Y: np.ndarray, n_per_layer: int = 20,
               step: float = 1e-5, seed: int = 0, floor: float = 1e-6) -> float:
    """Max relative error between analytic and central-difference gradients.

    X and Y are on the standardized scale. A random subset of weights and biases
    of every layer is checked.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.asarray(Y, dtype=float).reshape(len(X), -1)
    rng = np.random.default_rng(seed)
    _, grads = model.loss_and_grads(X, Y)
    worst = 0.0
    for i in range(model.n_layers):
        for param, grad in ((model.weights[i], grads[i][0]), (model.biases[i], grads[i][1])):
            flat, gflat = param.reshape(-1), grad.reshape(-1)
            picks = rng.choice(flat.size, size=min(n_per_layer, flat.size), replace=False)
            for j in picks:
                saved = flat[j]
                flat[j] = saved + step
                up = model.loss(X, Y)
                flat[j] = saved - step
                down = model.loss(X, Y)
                flat[j] = saved
                numeric = (up - down) / (2 * step)
                analytic = gflat[j]
                rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)
                worst = max(worst, rel)
    return worst


# --- 4. SERIALIZATION ---

def _scaler_to_dict(scaler: Optional[StandardScaler]):
    if scaler is None:
        return None
    return {"mean": scaler.mean_.tolist(), "scale": scaler.scale_.tolist()}


def _scaler_from_dict(payload) -> Optional[StandardScaler]:
    if payload is None:
        return None
    scaler = StandardScaler()
    scaler.mean_ = np.asarray(payload["mean"], dtype=float)
    scaler.scale_ = np.asarray(payload["scale"], dtype=float)
    scaler.var_ = scaler.scale_ ** 2
    scaler.n_features_in_ = scaler.mean_.size
    scaler.n_samples_seen_ = 0
    return scaler


def model_to_dict(model: MLPModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "widths": model.widths,
        "activation": "tanh",
        "output": model.output,
        "weights": [W.tolist() for W in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "x_scaler": _scaler_to_dict(model.x_scaler),
        "y_scaler": _scaler_to_dict(model.y_scaler),
    }


def model_from_dict(payload: dict) -> MLPModel:
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError("not a palp-mlp model file")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {payload.get('version')}")
    model = MLPModel(payload["widths"],
                     [np.asarray(W, dtype=float) for W in payload["weights"]],
                     [np.asarray(b, dtype=float) for b in payload["biases"]],
                     payload.get("output", "identity"))
    model.x_scaler = _scaler_from_dict(payload.get("x_scaler"))
    model.y_scaler = _scaler_from_dict(payload.get("y_scaler"))
    return model
