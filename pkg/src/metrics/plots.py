# -*- coding: utf-8 -*-
"""
src/metrics/plots.py
Static SVG panels: protocol motion/force with the shaded deviation band, and the
force-tracking panel with commanded force and the reference RMSE band.
Output is deterministic (no date metadata, fixed SVG id salt).
"""

from typing import Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from src.control.trace import ProtocolTrace, StepLabel  # noqa: E402
from src.metrics.force_metrics import (REFERENCE_TRACKING_PCT_RMSE, ForceTrace, all_series,  # noqa: E402
                                       pct_rmse)

plt.rcParams.update({"font.size": 9, "svg.hashsalt": "palp-bench", "svg.fonttype": "none"})

STEP_COLORS = {1: "#dddddd", 2: "#cde3f5", 3: "#fbe3c8", 4: "#cde3f5", 5: "#dddddd"}


def _shade_steps(ax, t: np.ndarray, step: np.ndarray) -> None:
    for label in StepLabel:
        idx = np.flatnonzero(step == int(label))
        if idx.size:
            ax.axvspan(t[idx[0]], t[idx[-1]], color=STEP_COLORS[int(label)], alpha=0.5, lw=0)
            ax.text(0.5 * (t[idx[0]] + t[idx[-1]]), 1.0, str(int(label)), ha="center", va="bottom",
                    transform=ax.get_xaxis_transform(), fontsize=8)


def _save(fig, path: str) -> str:
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return path


def protocol_panel(trace: ProtocolTrace, path: str, title: str = "") -> str:
    """Position (a) and force (b) versus time; Fz drawn downward-negative."""
    force = ForceTrace.from_protocol(trace)
    bench, rel, _, neg = all_series(force)

    fig, (ax_pos, ax_f) = plt.subplots(2, 1, figsize=(7.0, 5.5), sharex=True)
    _shade_steps(ax_pos, trace.t, trace.step)
    ax_pos.plot(trace.t, trace.pose[:, 1], color="tab:green", label="y (mm)")
    ax_z = ax_pos.twinx()
    ax_z.plot(trace.t, trace.pose[:, 2], color="tab:purple", label="z (mm)")
    ax_pos.set_ylabel("y (mm)")
    ax_z.set_ylabel("z (mm)")
    if title:
        ax_pos.set_title(title, pad=14)

    _shade_steps(ax_f, trace.t, trace.step)
    ax_f.plot(trace.t, -force.fz, color="tab:blue", label="$F_z$ (N)")
    ax_f.axhline(-bench, color="k", ls="--", lw=0.8, label=f"$F_{{bench}}$ = {bench:.2f} N")
    plough = trace.step == StepLabel.PLOUGH
    ax_f.fill_between(trace.t, 0.0, np.where(plough, neg.values, 0.0), color="tab:red", alpha=0.35,
                      label=r"$-\Delta F_z^{abs}$ (step 3)")
    ax_f.set_xlabel("t (s)")
    ax_f.set_ylabel("force (N)")
    ax_f.legend(loc="lower left", fontsize=7)

    inset = ax_f.inset_axes([0.68, 0.08, 0.3, 0.35])
    inset.plot(trace.pose[plough, 1], rel.values[plough], color="tab:orange", lw=0.8)
    inset.axhline(0.0, color="k", lw=0.5)
    inset.set_xlabel("y (mm)", fontsize=6)
    inset.set_ylabel(r"$\Delta F_z^{rel}$", fontsize=6)
    inset.tick_params(labelsize=6)
    fig.tight_layout()
    return _save(fig, path)


def reference_band(commanded: float) -> Tuple[float, float]:
    """Commanded force widened by the reference tracking RMSE on both sides."""
    margin = abs(commanded) * REFERENCE_TRACKING_PCT_RMSE / 100.0
    return commanded - margin, commanded + margin


def tracking_panel(trace: ProtocolTrace, path: str, title: str = "") -> str:
    measured = ForceTrace.from_protocol(trace, "meas")
    truth = ForceTrace.from_protocol(trace, "true")
    commanded = trace.commanded
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    _shade_steps(ax, trace.t, trace.step)
    ax.plot(trace.t, -measured.fz, color="tab:blue", label="measured $F_z$")
    ax.plot(trace.t, -truth.fz, color="tab:gray", lw=0.8, label="true $F_z$")
    if commanded is not None:
        ax.axhline(-commanded, color="k", ls="--", lw=0.8, label=f"commanded {-commanded:.0f} N")
        for i, level in enumerate(reference_band(commanded)):
            ax.axhline(-level, color="tab:red", ls=":", lw=0.8,
                       label=f"reference band \u00b1{REFERENCE_TRACKING_PCT_RMSE:.2f}%" if i == 0 else None)
        rmse = pct_rmse(measured, commanded)
        ax.text(0.01, 0.04, f"pct RMSE {rmse:.2f}% (reference {REFERENCE_TRACKING_PCT_RMSE:.2f}%)",
                transform=ax.transAxes, fontsize=8)
    ax.set_xlabel("t (s)")
    ax.set_ylabel("force (N)")
    if title:
        ax.set_title(title, pad=14)
    ax.legend(loc="upper right", fontsize=7)
    fig.tight_layout()
    return _save(fig, path)
