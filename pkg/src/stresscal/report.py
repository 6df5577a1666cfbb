"""Vector-graphics figure rendering for feature and calibration outputs.

Figures are written as SVG with a fixed hash salt and no date metadata
so repeated runs produce byte-identical files.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "stresscal"

import matplotlib.pyplot as plt
import numpy as np

from .calibration import SubjectCalibration
from .cardiac import HrSeries
from .core import LEVELS_PER_TEST, SessionMarkers
from .eda import ScrEvent, events_in_window
from .features import FeatureVector, SlopeFit, gsr_cumulative_slope, hr_slope

LEVELS = np.arange(1, LEVELS_PER_TEST + 1)


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_accuracy_levels(accuracy: dict[str, list[float]],
                         cal: SubjectCalibration | None,
                         path: str | Path) -> None:
    """Per-level accuracy bars for both tests, decrease level marked."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
    marks = {"stroop": None, "math": None}
    if cal is not None:
        marks = {"stroop": cal.stroop.decrease_level, "math": cal.math.decrease_level}
    for ax, (name, acc) in zip(axes, accuracy.items()):
        ax.bar(LEVELS[:len(acc)], acc, color="#4878a8")
        ax.set_title(f"{name} accuracy by level")
        ax.set_xlabel("difficulty level")
        ax.set_ylim(0, 105)
        dec = marks.get(name)
        if dec is not None:
            ax.axvline(dec - 0.5, color="#c0392b", linestyle="--", linewidth=1)
    axes[0].set_ylabel("accuracy [%]")
    fig.tight_layout()
    _save(fig, Path(path))


def _level_rows(rows: list[FeatureVector], scenario_id: str) -> list[FeatureVector]:
    prefix = f"{scenario_id}/level-"
    picked = [r for r in rows if r.label.startswith(prefix)]
    return sorted(picked, key=lambda r: int(r.label.rsplit("-", 1)[1]))


def plot_level_features(rows: list[FeatureVector], markers: SessionMarkers,
                        path: str | Path) -> None:
    """HR mean and SCR count per level for both test scenarios."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for sc in markers.scenarios:
        if sc.kind == "relax":
            continue
        lv_rows = _level_rows(rows, sc.id)
        hr = [r.hr_mean_bpm for r in lv_rows]
        axes[0].plot(LEVELS[:len(hr)], hr, marker="o", label=f"{sc.kind} ({sc.id})")
        counts = [r.gsr_peak_count for r in lv_rows]
        if all(c is not None for c in counts):
            axes[1].plot(LEVELS[:len(counts)], counts, marker="s", label=f"{sc.kind} ({sc.id})")
    axes[0].set_ylabel("mean HR [bpm]")
    axes[1].set_ylabel("SCR count")
    for ax in axes:
        ax.set_xlabel("difficulty level")
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, Path(path))


def plot_slopes(hr: HrSeries, scrs: list[ScrEvent] | None,
                markers: SessionMarkers, path: str | Path) -> None:
    """HR trend and cumulative SCR amplitude trend over each test block."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for sc in markers.scenarios:
        if sc.kind == "relax":
            continue
        w = sc.window()
        m = (hr.times_s >= w.start_s) & (hr.times_s < w.end_s)
        t = hr.times_s[m]
        axes[0].plot(t, hr.hr_bpm[m], linewidth=0.7, alpha=0.6)
        try:
            fit = hr_slope(hr, w)
            axes[0].plot(t, fit.slope * t + fit.intercept, linewidth=1.6,
                         label=f"{sc.id}: {fit.slope * 60:.2f} bpm/min")
        except Exception:
            pass
        if scrs:
            hits = sorted(events_in_window(scrs, w), key=lambda e: e.peak_s)
            if len(hits) >= 2:
                et = np.array([e.peak_s for e in hits])
                c = np.cumsum([e.amplitude_uS for e in hits])
                axes[1].step(et, c, where="post")
                fit = gsr_cumulative_slope(scrs, w)
                axes[1].plot(et, fit.slope * et + fit.intercept, linewidth=1.6,
                             label=f"{sc.id}: {fit.slope * 60:.3f} uS/min")
    axes[0].set_xlabel("session time [s]")
    axes[0].set_ylabel("HR [bpm]")
    axes[1].set_xlabel("session time [s]")
    axes[1].set_ylabel("cumulative SCR amplitude [uS]")
    for ax in axes:
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, Path(path))
