"""Per-window feature extraction and trend (slope) fits.

Eight features per window, two per channel: HR mean/std from ECG beats,
the same pair from BVP beats, SCR count and mean amplitude from the EDA
events, burst count and mean amplitude from EMG.  Trends are ordinary
least-squares lines over a window: HR-over-time, and the cumulative SCR
amplitude sum over event times.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .cardiac import BeatSeries, HrSeries, beats_to_hr, hr_stats
from .core import SessionMarkers, Window
from .eda import ScrEvent, events_in_window
from .emg import EmgBurst, bursts_in_window
from .errors import ValidationError

FEATURE_COLUMNS = (
    "label",
    "hr_mean_bpm", "hr_std_bpm",
    "bvp_hr_mean_bpm", "bvp_hr_std_bpm",
    "gsr_peak_count", "gsr_peak_mean_amplitude_uS",
    "emg_burst_count", "emg_burst_mean_amplitude_mV",
    "empty_fields",
)


@dataclass(frozen=True)
class FeatureVector:
    """Eight per-window features; None marks an absent channel.

    `empty_fields` names channel groups that are either absent or had no
    events in the window ("bvp", "gsr", "emg"), so a 0-count/0-mean pair
    is distinguishable from real silence downstream.
    """

    label: str
    hr_mean_bpm: float
    hr_std_bpm: float
    bvp_hr_mean_bpm: float | None
    bvp_hr_std_bpm: float | None
    gsr_peak_count: int | None
    gsr_peak_mean_amplitude_uS: float | None
    emg_burst_count: int | None
    emg_burst_mean_amplitude_mV: float | None
    empty_fields: tuple[str, ...] = ()


@dataclass(frozen=True)
class SlopeFit:
    """First-degree least-squares fit y = slope*t + intercept."""

    slope: float
    intercept: float
    rms_residual: float


@dataclass(frozen=True)
class ProcessedSession:
    """Detector outputs for one session; None marks a missing channel."""

    ecg_beats: BeatSeries
    bvp_beats: BeatSeries | None = None
    scr_events: list[ScrEvent] | None = None
    emg_bursts: list[EmgBurst] | None = None


def _hr_pair(hr: HrSeries | None, w: Window) -> tuple[float | None, float | None, bool]:
    if hr is None:
        return None, None, True
    try:
        mean, std = hr_stats(hr, w)
    except ValidationError:
        return None, None, True
    return mean, std, False


def extract_features(ecg_beats: BeatSeries,
                     bvp_beats: BeatSeries | None,
                     scrs: list[ScrEvent] | None,
                     bursts: list[EmgBurst] | None,
                     w: Window) -> FeatureVector:
    """Eight features over one window.

    ECG must cover the window (>= 2 HR samples inside) or a
    ValidationError is raised; the other channels degrade to
    None/flagged fields when absent or uncovered.
    """
    ecg_hr = beats_to_hr(ecg_beats)
    hr_mean, hr_std = hr_stats(ecg_hr, w)

    empty: list[str] = []
    bvp_hr = beats_to_hr(bvp_beats) if bvp_beats is not None and bvp_beats.n_beats >= 2 else None
    bvp_mean, bvp_std, bvp_empty = _hr_pair(bvp_hr, w)
    if bvp_empty:
        empty.append("bvp")

    if scrs is None:
        gsr_count, gsr_mean = None, None
        empty.append("gsr")
    else:
        hits = events_in_window(scrs, w)
        gsr_count = len(hits)
        gsr_mean = float(np.mean([e.amplitude_uS for e in hits])) if hits else 0.0
        if not hits:
            empty.append("gsr")

    if bursts is None:
        emg_count, emg_mean = None, None
        empty.append("emg")
    else:
        hits_b = bursts_in_window(bursts, w)
        emg_count = len(hits_b)
        emg_mean = float(np.mean([b.peak_amplitude_mV for b in hits_b])) if hits_b else 0.0
        if not hits_b:
            empty.append("emg")

    return FeatureVector(
        label=w.label,
        hr_mean_bpm=hr_mean, hr_std_bpm=hr_std,
        bvp_hr_mean_bpm=bvp_mean, bvp_hr_std_bpm=bvp_std,
        gsr_peak_count=gsr_count, gsr_peak_mean_amplitude_uS=gsr_mean,
        emg_burst_count=emg_count, emg_burst_mean_amplitude_mV=emg_mean,
        empty_fields=tuple(empty),
    )


def feature_table(data: ProcessedSession, markers: SessionMarkers) -> list[FeatureVector]:
    """One row per scenario plus one per difficulty level (19 on defaults)."""
    rows = []
    for sc in markers.scenarios:
        rows.append(extract_features(data.ecg_beats, data.bvp_beats,
                                     data.scr_events, data.emg_bursts, sc.window()))
        for iv in markers.levels_for(sc.id):
            rows.append(extract_features(data.ecg_beats, data.bvp_beats,
                                         data.scr_events, data.emg_bursts, iv.window()))
    return rows


def _ols(t: np.ndarray, y: np.ndarray) -> SlopeFit:
    if t.size < 2:
        raise ValidationError(f"slope fit needs >= 2 points, got {t.size}")
    if float(np.ptp(t)) == 0.0:
        raise ValidationError("slope fit needs at least two distinct times")
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    return SlopeFit(slope=float(slope), intercept=float(intercept),
                    rms_residual=float(np.sqrt(np.mean(resid**2))))


def hr_slope(hr: HrSeries, w: Window) -> SlopeFit:
    """Least-squares HR trend over the window (bpm per second)."""
    m = (hr.times_s >= w.start_s) & (hr.times_s < w.end_s)
    return _ols(hr.times_s[m], hr.hr_bpm[m])


def gsr_cumulative_slope(scrs: list[ScrEvent], w: Window) -> SlopeFit:
    """Trend of the running SCR amplitude sum at event peaks (uS per second).

    The cumulative sum is a step function over event times; its fitted
    slope rises when large or frequent responses cluster late in the
    window.
    """
    hits = sorted(events_in_window(scrs, w), key=lambda e: e.peak_s)
    if len(hits) < 2:
        raise ValidationError(f"need >= 2 SCR events in the window, got {len(hits)}")
    t = np.array([e.peak_s for e in hits])
    c = np.cumsum([e.amplitude_uS for e in hits])
    return _ols(t, c)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_feature_table(rows: list[FeatureVector], path: str | Path) -> None:
    """Delimited text, one row per window, fixed column order."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FEATURE_COLUMNS)
        for r in rows:
            writer.writerow([
                r.label,
                _cell(r.hr_mean_bpm), _cell(r.hr_std_bpm),
                _cell(r.bvp_hr_mean_bpm), _cell(r.bvp_hr_std_bpm),
                _cell(r.gsr_peak_count), _cell(r.gsr_peak_mean_amplitude_uS),
                _cell(r.emg_burst_count), _cell(r.emg_burst_mean_amplitude_mV),
                ";".join(r.empty_fields),
            ])
