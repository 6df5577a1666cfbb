"""Beat detection on ECG and BVP, heart-rate series, and window stats.

Detection follows the classic energy pipeline: band-pass to isolate the
beat complex, differentiate, square, integrate over a moving window,
then track signal/noise peak levels with exponentially updated adaptive
thresholds and a search-back pass for missed beats.  Detected positions
are refined on a zero-phase filtered copy of the waveform so beat times
land on the underlying deflection, not the energy envelope.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, filtfilt, find_peaks

from .core import TimeSeries, Window
from .errors import ValidationError

#: Physiologically plausible RR range (seconds); intervals outside are flagged.
RR_VALID_S = (0.3, 2.0)


@dataclass(frozen=True)
class BeatSeries:
    """Strictly increasing beat times from one cardiac channel."""

    beat_times_s: np.ndarray
    source: str  # "ECG" or "BVP"

    def __post_init__(self):
        times = np.asarray(self.beat_times_s, dtype=float)
        if times.ndim != 1:
            raise ValidationError("beat times must be 1-d")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValidationError("beat times must be strictly increasing")
        if self.source not in ("ECG", "BVP"):
            raise ValidationError(f"unknown beat source {self.source!r}")
        times = times.copy()
        times.setflags(write=False)
        object.__setattr__(self, "beat_times_s", times)

    @property
    def n_beats(self) -> int:
        return int(self.beat_times_s.size)

    def rr_intervals(self) -> np.ndarray:
        return np.diff(self.beat_times_s)

    def rr_flags(self) -> np.ndarray:
        """True where an RR interval falls outside the plausible range."""
        rr = self.rr_intervals()
        return (rr < RR_VALID_S[0]) | (rr > RR_VALID_S[1])


@dataclass(frozen=True)
class HrSeries:
    """Instantaneous heart rate, one sample per RR interval.

    Samples sit at the *end* of their interval; `flags` carries the RR
    plausibility flags so implausible intervals are visible, not dropped.
    """

    times_s: np.ndarray
    hr_bpm: np.ndarray
    flags: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times_s, dtype=float)
        hr = np.asarray(self.hr_bpm, dtype=float)
        fl = np.asarray(self.flags, dtype=bool)
        if not (t.shape == hr.shape == fl.shape):
            raise ValidationError("HR series arrays must share a shape")
        for arr in (t, hr, fl):
            arr.setflags(write=False)
        object.__setattr__(self, "times_s", t)
        object.__setattr__(self, "hr_bpm", hr)
        object.__setattr__(self, "flags", fl)

    @property
    def n_samples(self) -> int:
        return int(self.times_s.size)


@dataclass(frozen=True)
class BeatDetectorConfig:
    band_hz: tuple[float, float] = (5.0, 15.0)
    integration_window_s: float = 0.150
    refractory_s: float = 0.250
    refine_window_s: float = 0.080
    refine_abs: bool = True  # refine on |filtered| (lead polarity unknown)
    min_duration_s: float = 2.0
    searchback_factor: float = 1.66

    def __post_init__(self):
        lo, hi = self.band_hz
        if not (0 < lo < hi):
            raise ValidationError("band must satisfy 0 < low < high")
        if self.refractory_s <= 0 or self.integration_window_s <= 0:
            raise ValidationError("refractory and integration windows must be > 0")


ECG_DETECTOR = BeatDetectorConfig()
BVP_DETECTOR = BeatDetectorConfig(
    band_hz=(0.5, 5.0),
    integration_window_s=0.250,
    refractory_s=0.300,
    refine_window_s=0.200,
    refine_abs=False,  # pulse maxima are upward by convention
)


def _bandpass(x: np.ndarray, rate: float, band: tuple[float, float]) -> np.ndarray:
    lo, hi = band
    nyq = rate / 2.0
    hi = min(hi, 0.95 * nyq)
    if lo >= hi:
        raise ValidationError(f"sampling rate {rate} Hz too low for band {band}")
    b, a = butter(2, [lo / nyq, hi / nyq], btype="band")
    return filtfilt(b, a, x)


def _adaptive_threshold(mwi: np.ndarray, rate: float, cfg: BeatDetectorConfig) -> list[int]:
    """Indices of accepted beats in the integrated energy signal."""
    refractory = max(1, int(round(cfg.refractory_s * rate)))
    cand, _ = find_peaks(mwi, distance=refractory)
    if cand.size == 0:
        return []
    init = mwi[: max(int(2.0 * rate), 2)]
    spki = 0.25 * float(np.max(init))
    npki = 0.5 * float(np.mean(init))
    if spki <= 0:
        return []
    thr = npki + 0.25 * (spki - npki)
    beats: list[int] = []
    rr_hist: list[float] = []
    rejected: list[int] = []
    for idx in cand:
        peak = mwi[idx]
        if peak > thr:
            accepted = True
        else:
            accepted = False
            # Search back: if the expected beat is overdue, re-admit the
            # strongest rejected candidate above the lowered threshold.
            if beats and rr_hist:
                rr_avg = float(np.mean(rr_hist[-8:]))
                if (idx - beats[-1]) / rate > cfg.searchback_factor * rr_avg:
                    window = [j for j in rejected + [idx]
                              if j > beats[-1] and mwi[j] > 0.5 * thr]
                    if window:
                        best = max(window, key=lambda j: mwi[j])
                        rr_hist.append((best - beats[-1]) / rate)
                        beats.append(best)
                        spki = 0.25 * mwi[best] + 0.75 * spki
                        rejected = [j for j in rejected if j > best]
                        thr = npki + 0.25 * (spki - npki)
                        if idx == best:
                            continue
        if accepted:
            if beats:
                rr_hist.append((idx - beats[-1]) / rate)
            beats.append(idx)
            rejected = []
            spki = 0.125 * peak + 0.875 * spki
        else:
            rejected.append(idx)
            npki = 0.125 * peak + 0.875 * npki
        thr = npki + 0.25 * (spki - npki)
    return beats


def _refine(series: TimeSeries, wave: np.ndarray, beat_idx: list[int],
            cfg: BeatDetectorConfig) -> np.ndarray:
    rate = series.sampling_rate_hz
    half = max(1, int(round(cfg.refine_window_s * rate)))
    ref = np.abs(wave) if cfg.refine_abs else wave
    out = []
    for i in beat_idx:
        a = max(0, i - half)
        b = min(len(ref), i + half + 1)
        out.append(a + int(np.argmax(ref[a:b])))
    times = series.start_s + np.asarray(sorted(set(out)), dtype=float) / rate
    # Refinement can pull neighbours together; enforce the refractory gap.
    kept: list[float] = []
    for t in times:
        if not kept or t - kept[-1] >= cfg.refractory_s:
            kept.append(t)
    return np.asarray(kept)


def _detect(series: TimeSeries, cfg: BeatDetectorConfig, source: str) -> BeatSeries:
    if series.channel_kind != source:
        raise ValidationError(f"expected a {source} series, got {series.channel_kind}")
    if series.duration_s < cfg.min_duration_s:
        raise ValidationError(
            f"{source} segment too short for detection ({series.duration_s:.2f} s)"
        )
    rate = series.sampling_rate_hz
    x = np.asarray(series.values, dtype=float)
    if np.ptp(x) == 0.0:
        return BeatSeries(np.empty(0), source)
    band = _bandpass(x, rate, cfg.band_hz)
    deriv = np.gradient(band) * rate
    energy = deriv * deriv
    win = max(1, int(round(cfg.integration_window_s * rate)))
    mwi = np.convolve(energy, np.ones(win) / win, mode="same")
    beat_idx = _adaptive_threshold(mwi, rate, cfg)
    times = _refine(series, band, beat_idx, cfg)
    return BeatSeries(times, source)


def detect_r_peaks(series: TimeSeries, cfg: BeatDetectorConfig = ECG_DETECTOR) -> BeatSeries:
    """Detect R peaks on an ECG series.

    Returns an empty BeatSeries for an all-constant input; raises
    ValidationError when the segment is shorter than `cfg.min_duration_s`.
    """
    return _detect(series, cfg, "ECG")


def detect_bvp_peaks(series: TimeSeries, cfg: BeatDetectorConfig = BVP_DETECTOR) -> BeatSeries:
    """Detect pulse-wave maxima on a BVP series (one beat per pulse)."""
    return _detect(series, cfg, "BVP")


def beats_to_hr(beats: BeatSeries) -> HrSeries:
    """Instantaneous HR (60/RR) with interval-end timestamps."""
    if beats.n_beats < 2:
        raise ValidationError("need at least 2 beats to derive heart rate")
    rr = beats.rr_intervals()
    return HrSeries(times_s=beats.beat_times_s[1:], hr_bpm=60.0 / rr,
                    flags=beats.rr_flags())


def hr_stats(hr: HrSeries, w: Window) -> tuple[float, float]:
    """Mean and population standard deviation of HR samples inside `w`."""
    m = (hr.times_s >= w.start_s) & (hr.times_s < w.end_s)
    if int(np.count_nonzero(m)) < 2:
        raise ValidationError(
            f"window [{w.start_s}, {w.end_s}) holds {int(np.count_nonzero(m))} HR samples, need >= 2"
        )
    vals = hr.hr_bpm[m]
    return float(np.mean(vals)), float(np.std(vals))


def cardiac_agreement(hr_a: HrSeries, hr_b: HrSeries, w: Window,
                      grid_step_s: float = 1.0) -> float:
    """Mean absolute difference of the two HR curves resampled over `w`.

    Both series must cover the window; the curves are linearly
    interpolated onto a shared grid before differencing.
    """
    for name, hr in (("first", hr_a), ("second", hr_b)):
        if hr.n_samples < 2:
            raise ValidationError(f"{name} HR series has fewer than 2 samples")
        if hr.times_s[0] > w.start_s + grid_step_s or hr.times_s[-1] < w.end_s - grid_step_s:
            raise ValidationError(f"{name} HR series does not cover the window")
    grid = np.arange(w.start_s, w.end_s, grid_step_s)
    a = np.interp(grid, hr_a.times_s, hr_a.hr_bpm)
    b = np.interp(grid, hr_b.times_s, hr_b.hr_bpm)
    return float(np.mean(np.abs(a - b)))
