"""Windowed feature vectors and trend fits."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stresscal.cardiac import BeatSeries, HrSeries, beats_to_hr, hr_stats
from stresscal.core import Window, default_markers
from stresscal.eda import ScrEvent, events_in_window
from stresscal.emg import EmgBurst, bursts_in_window
from stresscal.errors import ValidationError
from stresscal.features import (
    FEATURE_COLUMNS,
    ProcessedSession,
    extract_features,
    feature_table,
    gsr_cumulative_slope,
    hr_slope,
    write_feature_table,
)


def _steady_beats(bpm: float, duration_s: float, source: str = "ECG") -> BeatSeries:
    period = 60.0 / bpm
    return BeatSeries(np.arange(period / 2, duration_s, period), source)


def _hr_series(times, bpm_values):
    t = np.asarray(times, dtype=float)
    return HrSeries(t, np.asarray(bpm_values, dtype=float), np.zeros(t.size, dtype=bool))


# --- extract_features --------------------------------------------------------

def test_steady_session_with_no_events():
    w = Window(0.0, 60.0, label="w")
    fv = extract_features(_steady_beats(60, 60), _steady_beats(60, 60, "BVP"),
                          scrs=[], bursts=[], w=w)
    assert fv.hr_mean_bpm == pytest.approx(60.0)
    assert fv.hr_std_bpm == pytest.approx(0.0, abs=1e-9)
    assert fv.bvp_hr_mean_bpm == pytest.approx(60.0)
    assert fv.gsr_peak_count == 0 and fv.gsr_peak_mean_amplitude_uS == 0.0
    assert fv.emg_burst_count == 0 and fv.emg_burst_mean_amplitude_mV == 0.0
    # zero counts are flagged so they read as "nothing happened", not "0.0 signal"
    assert fv.empty_fields == ("gsr", "emg")


def test_scr_count_and_mean_amplitude():
    w = Window(0.0, 60.0)
    scrs = [
        ScrEvent(onset_s=10.0, peak_s=11.2, amplitude_uS=0.2),
        ScrEvent(onset_s=20.0, peak_s=21.2, amplitude_uS=0.3),
        ScrEvent(onset_s=30.0, peak_s=31.2, amplitude_uS=0.4),
        ScrEvent(onset_s=70.0, peak_s=71.2, amplitude_uS=9.9),  # outside
    ]
    fv = extract_features(_steady_beats(60, 80), None, scrs, None, w)
    assert fv.gsr_peak_count == 3
    assert fv.gsr_peak_mean_amplitude_uS == pytest.approx(0.3)
    assert "gsr" not in fv.empty_fields


def test_missing_channels_come_back_as_none():
    fv = extract_features(_steady_beats(72, 90), None, None, None, Window(0.0, 90.0))
    assert fv.bvp_hr_mean_bpm is None and fv.bvp_hr_std_bpm is None
    assert fv.gsr_peak_count is None and fv.gsr_peak_mean_amplitude_uS is None
    assert fv.emg_burst_count is None and fv.emg_burst_mean_amplitude_mV is None
    assert fv.empty_fields == ("bvp", "gsr", "emg")


def test_window_without_ecg_coverage_is_an_error():
    beats = _steady_beats(60, 30)
    with pytest.raises(ValidationError):
        extract_features(beats, None, None, None, Window(100.0, 160.0))


def test_burst_features():
    bursts = [EmgBurst(5.0, 5.5, 1.0), EmgBurst(12.0, 12.4, 3.0)]
    fv = extract_features(_steady_beats(60, 60), None, None, bursts, Window(0.0, 60.0))
    assert fv.emg_burst_count == 2
    assert fv.emg_burst_mean_amplitude_mV == pytest.approx(2.0)


# --- feature_table -----------------------------------------------------------

def test_feature_table_layout_on_default_markers(detected, stressed_session):
    rows = feature_table(detected, stressed_session.markers)
    assert len(rows) == 19
    labels = [r.label for r in rows]
    assert labels[0] == "I"
    assert labels[1] == "II"
    assert labels[2:9] == [f"II/level-{k}" for k in range(1, 8)]
    assert labels[9:11] == ["III", "IV"]
    assert labels[11:18] == [f"IV/level-{k}" for k in range(1, 8)]
    assert labels[18] == "V"


def test_feature_table_rows_match_direct_recounts(detected, stressed_session):
    rows = feature_table(detected, stressed_session.markers)
    hr = beats_to_hr(detected.ecg_beats)
    windows = []
    for sc in stressed_session.markers.scenarios:
        windows.append(sc.window())
        windows.extend(iv.window() for iv in stressed_session.markers.levels_for(sc.id))
    assert len(windows) == len(rows)
    for w, row in zip(windows, rows):
        mean, std = hr_stats(hr, w)
        assert row.hr_mean_bpm == mean and row.hr_std_bpm == std
        assert row.gsr_peak_count == len(events_in_window(detected.scr_events, w))
        assert row.emg_burst_count == len(bursts_in_window(detected.emg_bursts, w))


def test_feature_csv_round_trips_values(tmp_path, detected, stressed_session):
    rows = feature_table(detected, stressed_session.markers)
    path = tmp_path / "features.csv"
    write_feature_table(rows, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(FEATURE_COLUMNS)
    assert len(lines) == 1 + len(rows)
    first = lines[1].split(",")
    assert first[0] == "I"
    assert float(first[1]) == rows[0].hr_mean_bpm


def test_feature_csv_leaves_missing_cells_empty(tmp_path):
    fv = extract_features(_steady_beats(60, 60), None, None, None, Window(0.0, 60.0, "w"))
    path = tmp_path / "features.csv"
    write_feature_table([fv], path)
    cells = path.read_text(encoding="utf-8").splitlines()[1].split(",")
    assert cells[3:9] == [""] * 6
    assert cells[9] == "bvp;gsr;emg"


# --- hr_slope ----------------------------------------------------------------

def test_hr_slope_recovers_a_clean_ramp():
    t = np.arange(0.0, 60.0, 0.5)
    fit = hr_slope(_hr_series(t, 70.0 + 2.0 * t), Window(0.0, 60.0))
    assert fit.slope == pytest.approx(2.0, abs=1e-9)
    assert fit.intercept == pytest.approx(70.0, abs=1e-9)
    assert fit.rms_residual == pytest.approx(0.0, abs=1e-9)


def test_hr_slope_of_constant_hr_is_zero():
    t = np.linspace(5.0, 25.0, 40)
    fit = hr_slope(_hr_series(t, np.full(40, 64.0)), Window(0.0, 30.0))
    assert fit.slope == pytest.approx(0.0, abs=1e-12)
    assert fit.intercept == pytest.approx(64.0)


def test_hr_slope_matches_normal_equations_on_noisy_data():
    rng = np.random.default_rng(11)
    t = np.sort(rng.uniform(0.0, 120.0, 200))
    y = 80.0 - 0.05 * t + rng.normal(0.0, 1.5, t.size)
    fit = hr_slope(_hr_series(t, y), Window(0.0, 120.0))
    # closed form: slope = cov(t, y) / var(t)
    tc, yc = t - t.mean(), y - y.mean()
    slope = float(np.dot(tc, yc) / np.dot(tc, tc))
    intercept = float(y.mean() - slope * t.mean())
    assert fit.slope == pytest.approx(slope, abs=1e-9)
    assert fit.intercept == pytest.approx(intercept, abs=1e-9)


def test_hr_slope_uses_only_samples_inside_the_window():
    t = np.array([0.0, 1.0, 2.0, 10.0, 11.0, 12.0])
    y = np.array([60.0, 61.0, 62.0, 0.0, 0.0, 0.0])
    fit = hr_slope(_hr_series(t, y), Window(0.0, 5.0))
    assert fit.slope == pytest.approx(1.0, abs=1e-12)


def test_hr_slope_needs_two_samples():
    with pytest.raises(ValidationError, match=">= 2"):
        hr_slope(_hr_series([1.0], [60.0]), Window(0.0, 10.0))
    with pytest.raises(ValidationError, match="distinct"):
        hr_slope(_hr_series([1.0, 1.0], [60.0, 62.0]), Window(0.0, 10.0))


@settings(max_examples=50, deadline=None)
@given(
    slope=st.floats(-5.0, 5.0),
    intercept=st.floats(40.0, 140.0),
    n=st.integers(3, 60),
)
def test_hr_slope_recovers_any_affine_series(slope, intercept, n):
    t = np.linspace(0.0, 90.0, n)
    fit = hr_slope(_hr_series(t, intercept + slope * t), Window(0.0, 91.0))
    assert fit.slope == pytest.approx(slope, abs=1e-6)
    assert fit.rms_residual < 1e-6


@settings(max_examples=30, deadline=None)
@given(shift=st.floats(0.0, 500.0))
def test_hr_slope_is_invariant_under_time_translation(shift):
    t = np.linspace(0.0, 60.0, 30)
    y = 70.0 + 0.8 * t
    base = hr_slope(_hr_series(t, y), Window(0.0, 61.0))
    moved = hr_slope(_hr_series(t + shift, y), Window(shift, shift + 61.0))
    assert moved.slope == pytest.approx(base.slope, abs=1e-7)


# --- gsr_cumulative_slope ------------------------------------------------------

def test_gsr_cumulative_slope_of_evenly_spaced_equal_events():
    scrs = [ScrEvent(t - 1.0, t, 0.1) for t in (10.0, 20.0, 30.0)]
    fit = gsr_cumulative_slope(scrs, Window(0.0, 60.0))
    # cumulative sum 0.1/0.2/0.3 over t=10/20/30
    assert fit.slope == pytest.approx(0.01, abs=1e-12)
    assert fit.rms_residual == pytest.approx(0.0, abs=1e-12)


def test_gsr_cumulative_slope_needs_two_events():
    with pytest.raises(ValidationError, match=">= 2 SCR"):
        gsr_cumulative_slope([ScrEvent(9.0, 10.0, 0.5)], Window(0.0, 60.0))


def test_denser_or_larger_responses_steepen_the_cumulative_trend():
    w = Window(0.0, 60.0)
    sparse = [ScrEvent(t - 1.0, t, 0.2) for t in np.arange(5.0, 56.0, 10.0)]
    dense = [ScrEvent(t - 1.0, t, 0.2) for t in np.arange(5.0, 56.0, 5.0)]
    assert gsr_cumulative_slope(dense, w).slope == pytest.approx(
        2.0 * gsr_cumulative_slope(sparse, w).slope)
    # the cumulative sum is linear in amplitude, so its trend is too
    doubled = [ScrEvent(e.onset_s, e.peak_s, 2.0 * e.amplitude_uS) for e in sparse]
    assert gsr_cumulative_slope(doubled, w).slope == pytest.approx(
        2.0 * gsr_cumulative_slope(sparse, w).slope)


def test_gsr_cumulative_slope_sorts_events_by_peak_time():
    scrs = [ScrEvent(29.0, 30.0, 0.1), ScrEvent(9.0, 10.0, 0.1), ScrEvent(19.0, 20.0, 0.1)]
    fit = gsr_cumulative_slope(scrs, Window(0.0, 60.0))
    assert fit.slope == pytest.approx(0.01, abs=1e-12)
