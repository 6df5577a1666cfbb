"""Muscle-activity envelope and burst detection.

The EMG envelope is a full-wave rectified moving RMS; bursts are
contiguous supra-threshold envelope stretches that last long enough to
be actual activity rather than a spike.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d

from .core import TimeSeries, Window
from .errors import ValidationError


@dataclass(frozen=True)
class EmgBurst:
    start_s: float
    end_s: float
    peak_amplitude_mV: float


@dataclass(frozen=True)
class BurstConfig:
    """Burst detection knobs.

    `threshold_mv` fixes the envelope threshold directly; when None the
    threshold is estimated as baseline mean + `baseline_sigmas` * std of
    the envelope over `baseline` (defaults to the first relax block).
    """

    rms_window_s: float = 0.100
    min_duration_s: float = 0.200
    threshold_mv: float | None = None
    baseline: Window | None = None
    baseline_sigmas: float = 3.0

    def __post_init__(self):
        if self.rms_window_s <= 0 or self.min_duration_s <= 0:
            raise ValidationError("windows must be > 0")


def emg_envelope(series: TimeSeries, rms_window_s: float = 0.100) -> TimeSeries:
    """Moving-RMS envelope of a rectified EMG trace.

    Edge windows are averaged with edge-replicated samples so a constant
    input maps to the same constant envelope.
    """
    if series.channel_kind != "EMG":
        raise ValidationError(f"expected an EMG series, got {series.channel_kind}")
    if rms_window_s <= 0:
        raise ValidationError("rms window must be > 0")
    rate = series.sampling_rate_hz
    win = max(1, int(round(rms_window_s * rate)))
    power = np.asarray(series.values, dtype=float) ** 2
    env = np.sqrt(uniform_filter1d(power, size=win, mode="nearest"))
    return TimeSeries("EMG", rate, series.start_s, env)


def burst_threshold(envelope: TimeSeries, baseline: Window,
                    sigmas: float = 3.0) -> float:
    """Baseline-derived burst threshold: mean + `sigmas` * std over `baseline`."""
    rate = envelope.sampling_rate_hz
    t = envelope.times()
    m = (t >= baseline.start_s) & (t < baseline.end_s)
    if int(np.count_nonzero(m)) < int(rate):
        raise ValidationError("baseline window covers less than 1 s of the envelope")
    seg = envelope.values[m]
    return float(np.mean(seg) + sigmas * np.std(seg))


def detect_bursts(envelope: TimeSeries, cfg: BurstConfig = BurstConfig()) -> list[EmgBurst]:
    """Contiguous supra-threshold envelope regions lasting >= min duration.

    Returns bursts ordered by onset; an envelope that never crosses the
    threshold yields an empty list.
    """
    if envelope.channel_kind != "EMG":
        raise ValidationError(f"expected an EMG envelope, got {envelope.channel_kind}")
    rate = envelope.sampling_rate_hz
    if cfg.threshold_mv is not None:
        thr = cfg.threshold_mv
    else:
        base = cfg.baseline or Window(envelope.start_s, envelope.start_s + 240.0)
        thr = burst_threshold(envelope, base, cfg.baseline_sigmas)
    if thr <= 0:
        raise ValidationError(f"burst threshold must be > 0, got {thr}")

    above = envelope.values > thr
    min_len = max(1, int(round(cfg.min_duration_s * rate)))
    bursts: list[EmgBurst] = []
    i = 0
    n = envelope.n_samples
    while i < n:
        if not above[i]:
            i += 1
            continue
        j = i
        while j < n and above[j]:
            j += 1
        if j - i >= min_len:
            seg = envelope.values[i:j]
            bursts.append(EmgBurst(
                start_s=envelope.start_s + i / rate,
                end_s=envelope.start_s + j / rate,
                peak_amplitude_mV=float(np.max(seg)),
            ))
        i = j
    return bursts


def bursts_in_window(bursts: list[EmgBurst], w: Window) -> list[EmgBurst]:
    """Bursts assigned to `w` by their start time."""
    return [b for b in bursts if w.contains(b.start_s)]
