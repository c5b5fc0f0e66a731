# -*- coding: utf-8 -*-
"""
src/detection/detectors.py
Image head, sensor head and their late fusion. Both heads are small tanh MLPs
with a logistic output trained with binary cross-entropy on standardized features.
"""

from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
from sklearn.model_selection import train_test_split
from sklearn.preprocessing import StandardScaler

from src.calibration.mlp import MLPModel, TrainConfig, fit_mlp, init_mlp
from src.detection.dataset import DetectionConfig, LabeledSample
from src.detection.features import featurize_image, summarize_ft
from src.utils.errors import ShapeMismatchError
from src.utils.io import get_logger

logger = get_logger(__name__)

MODALITIES = ("image", "sensor", "fused")


def image_features(samples: Sequence[LabeledSample]) -> np.ndarray:
    return np.array([featurize_image(s.image) for s in samples])


def sensor_features(samples: Sequence[LabeledSample]) -> np.ndarray:
    lengths = {s.window.shape[0] for s in samples}
    if len(lengths) > 1:
        raise ShapeMismatchError(f"F/T windows have mixed lengths {sorted(lengths)}")
    return np.array([summarize_ft(s.window, f_ref=s.f_bench) for s in samples])


# --- 1. DETECTORS ---

@dataclass
class Detector:
    modality: str
    model: MLPModel
    featurize: Callable[[Sequence[LabeledSample]], np.ndarray]

    def predict_proba(self, samples: Sequence[LabeledSample]) -> np.ndarray:
        X = self.model.x_scaler.transform(self.featurize(samples))
        return self.model.predict_standardized(X)[:, 0]


@dataclass
class FusedDetector:
    image: Detector
    sensor: Detector
    weights: Tuple[float, float] = (0.5, 0.5)
    modality: str = "fused"

    def predict_proba(self, samples: Sequence[LabeledSample]) -> np.ndarray:
        return fuse(self.image.predict_proba(samples), self.sensor.predict_proba(samples), self.weights)


def fuse(p_image, p_sensor, weights: Tuple[float, float] = (0.5, 0.5)):
    """Weighted mean of the two probabilities; equal weights give the plain mean."""
    w_img, w_ft = weights
    return (w_img * np.asarray(p_image) + w_ft * np.asarray(p_sensor)) / (w_img + w_ft)


def _train_head(modality: str, featurize, samples: Sequence[LabeledSample], seed: int,
                cfg: DetectionConfig) -> Detector:
    X = featurize(samples)
    y = np.array([[s.label] for s in samples], dtype=float)
    model = init_mlp([X.shape[1], *cfg.head_widths, 1], seed=seed, output="logistic")
    model.x_scaler = StandardScaler().fit(X)
    Xs = model.x_scaler.transform(X)
    train_cfg = TrainConfig(epochs=cfg.epochs, learning_rate=cfg.learning_rate,
                            batch_size=cfg.batch_size, seed=seed)
    history = fit_mlp(model, Xs, y, Xs, y, train_cfg)
    logger.info(f"   {modality} head: final BCE {history['train_loss'][-1]:.4f}")
    return Detector(modality, model, featurize)


# --- 2. TRAINING ---

@dataclass
class DetectorSet:
    image: Detector
    sensor: Detector
    fused: FusedDetector
    train: List[LabeledSample]
    test: List[LabeledSample]

    def all(self):
        return [self.image, self.sensor, self.fused]


def split_dataset(samples: Sequence[LabeledSample], seed: int,
                  test_size: float = 0.2) -> Tuple[List[LabeledSample], List[LabeledSample]]:
    labels = np.array([s.label for s in samples])
    if len(set(labels.tolist())) < 2:
        raise ValueError("dataset must contain both classes")
    train_idx, test_idx = train_test_split(np.arange(len(samples)), test_size=test_size,
                                           random_state=seed, stratify=labels)
    return [samples[i] for i in sorted(train_idx)], [samples[i] for i in sorted(test_idx)]


def train_detectors(samples: Sequence[LabeledSample], seed: int = 0,
                    cfg: DetectionConfig = DetectionConfig()) -> DetectorSet:
    train, test = split_dataset(samples, seed, cfg.test_size)
    logger.info(f"--- Training detectors: {len(train)} train / {len(test)} test samples ---")
    image = _train_head("image", image_features, train, seed, cfg)
    sensor = _train_head("sensor", sensor_features, train, seed, cfg)
    return DetectorSet(image, sensor, FusedDetector(image, sensor, cfg.fusion_weights), train, test)
