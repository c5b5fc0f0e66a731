# -*- coding: utf-8 -*-
"""
src/detection/evaluate.py

Precision / recall / F1 for the tendon-positive class at a fixed 0.5 threshold,
confusion counts, and the three-row modality table.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Sequence

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix, f1_score, precision_score, recall_score

from src.detection.dataset import LabeledSample

THRESHOLD = 0.5

# Reported reference values per modality (precision, recall, F1)
REFERENCE_TABLE = {
    "image": (1.00, 1.00, 1.00),
    "sensor": (0.64, 1.00, 0.78),
    "fused": (1.00, 0.97, 0.98),
}
ROW_NAMES = {"image": "Image", "sensor": "Sensor (MLP)", "fused": "Combined (Late Fusion)"}


@dataclass
class EvalReport:
    modality: str
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def f1_from_pr(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def report_from_predictions(modality: str, y_true, y_pred) -> EvalReport:
    y_true, y_pred = np.asarray(y_true, dtype=int), np.asarray(y_pred, dtype=int)
    tn, fp, fn, tp = confusion_matrix(y_true, y_pred, labels=[0, 1]).ravel()
    return EvalReport(
        modality=modality,
        precision=float(precision_score(y_true, y_pred, zero_division=0)),
        recall=float(recall_score(y_true, y_pred, zero_division=0)),
        f1=float(f1_score(y_true, y_pred, zero_division=0)),
        tp=int(tp), fp=int(fp), fn=int(fn), tn=int(tn))


def evaluate(detector, test: Sequence[LabeledSample]) -> EvalReport:
    if len(test) == 0:
        raise ValueError("test set is empty")
    y_true = np.array([s.label for s in test])
    if len(set(y_true.tolist())) < 2:
        raise ValueError("test set must contain both classes")
    y_pred = (detector.predict_proba(test) >= THRESHOLD).astype(int)
    return report_from_predictions(detector.modality, y_true, y_pred)


def ordering_holds(reports: Dict[str, EvalReport]) -> bool:
    """Image beats sensor, fusion does not fall below sensor."""
    return reports["image"].f1 > reports["sensor"].f1 and reports["fused"].f1 >= reports["sensor"].f1


def reports_frame(reports: Dict[str, EvalReport]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in reports.values()])


def format_table(reports: Dict[str, EvalReport]) -> str:
    header = f"{'Model':<26}{'Precision':>10}{'Recall':>10}{'F1 Score':>10}   (reference P / R / F1)"
    lines = [header, "-" * len(header)]
    for key, r in reports.items():
        ref = REFERENCE_TABLE.get(key)
        ref_txt = f"   ({ref[0]:.2f} / {ref[1]:.2f} / {ref[2]:.2f})" if ref else ""
        lines.append(f"{ROW_NAMES.get(key, key):<26}{r.precision:>10.2f}{r.recall:>10.2f}{r.f1:>10.2f}{ref_txt}")
    return "\n".join(lines)
