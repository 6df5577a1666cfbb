"""Deterministic synthetic signal and session generators.

These generators carry their own ground truth (beat times, SCR events,
burst intervals, per-level accuracy) and exist so every detector in the
package can be tested round-trip against known inputs.  All randomness
flows from explicit seeds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import butter, filtfilt

from .core import (SCENARIO_PLAN, LEVELS_PER_TEST, SessionMarkers, TimeSeries,
                   default_markers)
from .eda import BatemanKernel
from .errors import ValidationError
from .protocol import (LogRecord, StimulusPlan, COLORS, generate_math_plan,
                       generate_stroop_plan)


@dataclass(frozen=True)
class HrProfile:
    """Piecewise-linear heart-rate profile: (time_s, bpm) breakpoints."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(t), float(b)) for t, b in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 1:
            raise ValidationError("HR profile needs at least one point")
        ts = [t for t, _ in pts]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValidationError("HR profile breakpoints must increase")
        if any(not (20.0 <= b <= 220.0) for _, b in pts):
            raise ValidationError("HR profile values must lie in [20, 220] bpm")

    def bpm_at(self, t: np.ndarray) -> np.ndarray:
        xs = np.array([p[0] for p in self.points])
        ys = np.array([p[1] for p in self.points])
        return np.interp(t, xs, ys)

    @staticmethod
    def constant(bpm: float) -> "HrProfile":
        return HrProfile(((0.0, bpm),))


def beat_times_from_profile(hr: HrProfile, duration_s: float) -> np.ndarray:
    """Beat times from integrating the HR profile.

    Beats fall where the accumulated beat phase crosses k + 1/2, so a
    constant 60 bpm minute yields 60 beats at 0.5, 1.5, ... 59.5 s.
    """
    if duration_s <= 0:
        raise ValidationError("duration must be > 0")
    grid = np.linspace(0.0, duration_s, max(int(duration_s * 1000), 2))
    rate = hr.bpm_at(grid) / 60.0
    phase = np.concatenate(([0.0], np.cumsum((rate[1:] + rate[:-1]) * 0.5 * np.diff(grid))))
    targets = np.arange(0.5, phase[-1], 1.0)
    return np.interp(targets, phase, grid)


def _band_noise(rng: np.random.Generator, n: int, rate: float,
                band: tuple[float, float]) -> np.ndarray:
    """Unit-variance Gaussian noise band-limited to `band` (Hz)."""
    x = rng.standard_normal(n)
    lo, hi = band
    nyq = rate / 2.0
    hi = min(hi, 0.95 * nyq)
    if lo <= 0:
        b, a = butter(4, hi / nyq, btype="low")
    else:
        b, a = butter(4, [lo / nyq, hi / nyq], btype="band")
    x = filtfilt(b, a, x)
    sd = np.std(x)
    return x / sd if sd > 0 else x


def _add_noise(clean: np.ndarray, rng: np.random.Generator, rate: float,
               band: tuple[float, float], snr_db: float | None) -> np.ndarray:
    """Add band-limited white noise at `snr_db` against the clean trace's std."""
    if snr_db is None:
        return clean
    signal_rms = float(np.std(clean))
    if signal_rms == 0:
        return clean
    noise_rms = signal_rms / (10.0 ** (snr_db / 20.0))
    return clean + noise_rms * _band_noise(rng, clean.size, rate, band)


@dataclass(frozen=True)
class EcgSpec:
    seed: int = 0
    duration_s: float = 60.0
    hr: HrProfile = HrProfile.constant(60.0)
    sampling_rate_hz: float = 256.0
    snr_db: float | None = None
    bump_sigma_s: float = 0.012
    amplitude_mv: float = 1.0


def gen_ecg(spec: EcgSpec) -> tuple[TimeSeries, np.ndarray]:
    """Synthetic ECG: a Gaussian R-wave bump per beat, optional noise.

    Returns the series and the truth beat times.
    """
    beats = beat_times_from_profile(spec.hr, spec.duration_s)
    n = int(round(spec.duration_s * spec.sampling_rate_hz))
    t = np.arange(n) / spec.sampling_rate_hz
    clean = np.zeros(n)
    half = 5.0 * spec.bump_sigma_s
    for tb in beats:
        a = np.searchsorted(t, tb - half)
        b = np.searchsorted(t, tb + half)
        clean[a:b] += spec.amplitude_mv * np.exp(-0.5 * ((t[a:b] - tb) / spec.bump_sigma_s) ** 2)
    rng = np.random.default_rng(spec.seed)
    vals = _add_noise(clean, rng, spec.sampling_rate_hz, (0.5, 40.0), spec.snr_db)
    return TimeSeries("ECG", spec.sampling_rate_hz, 0.0, vals), beats


@dataclass(frozen=True)
class BvpSpec:
    seed: int = 0
    duration_s: float = 60.0
    hr: HrProfile = HrProfile.constant(60.0)
    sampling_rate_hz: float = 64.0
    snr_db: float | None = None
    rise_sigma_s: float = 0.050
    decay_sigma_s: float = 0.120
    amplitude: float = 1.0


def gen_bvp(spec: BvpSpec) -> tuple[TimeSeries, np.ndarray]:
    """Synthetic BVP: an asymmetric pulse per beat, maximum at the beat time.

    Sharing an HrProfile with :func:`gen_ecg` yields the identical truth
    beat list, which is what paired-channel agreement tests rely on.
    """
    beats = beat_times_from_profile(spec.hr, spec.duration_s)
    n = int(round(spec.duration_s * spec.sampling_rate_hz))
    t = np.arange(n) / spec.sampling_rate_hz
    clean = np.zeros(n)
    half = 5.0 * spec.decay_sigma_s
    for tb in beats:
        a = np.searchsorted(t, tb - half)
        b = np.searchsorted(t, tb + half)
        dt = t[a:b] - tb
        sigma = np.where(dt < 0, spec.rise_sigma_s, spec.decay_sigma_s)
        clean[a:b] += spec.amplitude * np.exp(-0.5 * (dt / sigma) ** 2)
    rng = np.random.default_rng(spec.seed)
    vals = _add_noise(clean, rng, spec.sampling_rate_hz, (0.5, 8.0), spec.snr_db)
    return TimeSeries("BVP", spec.sampling_rate_hz, 0.0, vals), beats


@dataclass(frozen=True)
class GsrSpec:
    seed: int = 0
    duration_s: float = 60.0
    sampling_rate_hz: float = 16.0
    tonic_uS: float = 2.0
    drift_uS_per_min: float = 0.0
    events: tuple[tuple[float, float], ...] = ()  # (time_s, amplitude_uS)
    kernel: BatemanKernel = BatemanKernel()
    snr_db: float | None = None


def gen_gsr(spec: GsrSpec) -> tuple[TimeSeries, list[tuple[float, float]]]:
    """Synthetic GSR: tonic baseline plus unit-peak kernel copies.

    Each (time, amplitude) event contributes `amplitude * kernel(t - time)`,
    so the truth amplitude equals the phasic peak the event produces.
    """
    n = int(round(spec.duration_s * spec.sampling_rate_hz))
    t = np.arange(n) / spec.sampling_rate_hz
    clean = spec.tonic_uS + (spec.drift_uS_per_min / 60.0) * t
    for et, amp in spec.events:
        if not (0 <= et < spec.duration_s):
            raise ValidationError(f"event at {et} s outside the trace")
        clean += amp * spec.kernel.evaluate(t - et)
    rng = np.random.default_rng(spec.seed)
    vals = _add_noise(clean, rng, spec.sampling_rate_hz, (0.0, 4.0), spec.snr_db)
    vals = np.maximum(vals, 0.0)  # conductance cannot go negative
    return TimeSeries("GSR", spec.sampling_rate_hz, 0.0, vals), list(spec.events)


@dataclass(frozen=True)
class EmgSpec:
    seed: int = 0
    duration_s: float = 60.0
    sampling_rate_hz: float = 256.0
    bursts: tuple[tuple[float, float, float], ...] = ()  # (start_s, end_s, amplitude_mV)
    noise_floor_mv: float = 0.01


def gen_emg(spec: EmgSpec) -> tuple[TimeSeries, list[tuple[float, float, float]]]:
    """Synthetic EMG: quiet Gaussian floor plus amplitude-modulated bursts.

    Burst samples are white noise scaled by a smooth on/off envelope of
    height `amplitude_mV`, so the moving-RMS envelope peaks near that
    amplitude.
    """
    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.duration_s * spec.sampling_rate_hz))
    t = np.arange(n) / spec.sampling_rate_hz
    vals = spec.noise_floor_mv * rng.standard_normal(n)
    for start, end, amp in spec.bursts:
        if not (0 <= start < end <= spec.duration_s):
            raise ValidationError(f"burst [{start}, {end}] outside the trace")
        m = (t >= start) & (t < end)
        nn = int(np.count_nonzero(m))
        ramp = max(2, int(0.05 * spec.sampling_rate_hz))
        env = np.ones(nn)
        k = min(ramp, nn // 2)
        if k > 0:
            env[:k] = np.linspace(0.0, 1.0, k)
            env[nn - k:] = np.linspace(1.0, 0.0, k)
        vals[m] += amp * env * rng.standard_normal(nn)
    return TimeSeries("EMG", spec.sampling_rate_hz, 0.0, vals), list(spec.bursts)


# ---------------------------------------------------------------------------
# Full-session generation


@dataclass(frozen=True)
class SessionProfile:
    """Recipe for a complete five-scenario session with ground truth.

    Accuracy lists hold target percent-correct per level; realized
    accuracies are quantized to the slide counts (15 or 7 per level).
    SCR counts are per level of each test scenario; relax scenarios get
    `scr_relax_count` events each.  HR is `relax_bpm` during relax
    blocks and `test_base_bpm + hr_step_bpm*(level-1)` during tests.
    """

    name: str
    stroop_accuracy: tuple[float, ...]
    math_accuracy: tuple[float, ...]
    relax_bpm: float = 70.0
    test_base_bpm: float = 72.0
    hr_step_bpm: float = 2.0
    scr_level_counts: tuple[int, ...] = (0, 0, 0, 0, 0, 0, 0)
    scr_relax_count: int = 0
    scr_amp_range_uS: tuple[float, float] = (0.15, 0.5)
    emg_bursts: tuple[tuple[float, float, float], ...] = ()
    ecg_rate_hz: float = 256.0
    bvp_rate_hz: float = 64.0
    gsr_rate_hz: float = 16.0
    emg_rate_hz: float = 256.0
    ecg_snr_db: float | None = 20.0
    bvp_snr_db: float | None = 20.0
    gsr_snr_db: float | None = None
    tonic_uS: float = 2.0

    def __post_init__(self):
        for acc in (self.stroop_accuracy, self.math_accuracy):
            if len(acc) != LEVELS_PER_TEST:
                raise ValidationError(f"need {LEVELS_PER_TEST} accuracy values, got {len(acc)}")
            if any(not (0.0 <= a <= 100.0) for a in acc):
                raise ValidationError("accuracy values must lie in [0, 100]")
        if len(self.scr_level_counts) != LEVELS_PER_TEST:
            raise ValidationError(f"need {LEVELS_PER_TEST} SCR counts")


@dataclass(frozen=True)
class SynthSession:
    profile: SessionProfile
    seed: int
    markers: SessionMarkers
    series: dict[str, TimeSeries]
    stroop_plan: StimulusPlan
    math_plan: StimulusPlan
    log: list[LogRecord]
    truth_beats: np.ndarray
    truth_scr_events: list[tuple[float, float]]
    truth_emg_bursts: list[tuple[float, float, float]]
    realized_stroop_accuracy: tuple[float, ...]
    realized_math_accuracy: tuple[float, ...]


def calm_profile() -> SessionProfile:
    """Flat subject: steady HR, no SCRs, perfect accuracy everywhere."""
    flat = tuple([100.0] * LEVELS_PER_TEST)
    return SessionProfile(
        name="calm", stroop_accuracy=flat, math_accuracy=flat,
        relax_bpm=68.0, test_base_bpm=68.0, hr_step_bpm=0.0,
        scr_level_counts=(0,) * LEVELS_PER_TEST,
    )


def stressed_profile() -> SessionProfile:
    """Stressed subject: rising HR and SCR rate, collapsing accuracy.

    Colour-test accuracy holds into the mid levels then falls off;
    arithmetic collapses much earlier.  After quantization to slide
    counts the colour test drops at level 6 under the default rule.
    """
    return SessionProfile(
        name="stressed",
        stroop_accuracy=(99.55, 100.0, 99.55, 98.22, 92.88, 76.88, 52.44),
        math_accuracy=(100.0, 80.61, 82.65, 60.20, 56.12, 43.87, 15.30),
        relax_bpm=70.0, test_base_bpm=72.0, hr_step_bpm=2.5,
        scr_level_counts=(0, 1, 2, 3, 4, 5, 6),
        scr_relax_count=0,
    )


def planted_profile(decrease_level: int, seed: int = 0) -> SessionProfile:
    """Profile whose accuracy collapses at a chosen level by construction.

    Levels before the planted decrease score 100%, the decrease level
    and everything after score at most 70%, so the default rule (10 pt
    drop, sustained) must flag exactly `decrease_level`.
    """
    if not (2 <= decrease_level <= LEVELS_PER_TEST):
        raise ValidationError("planted decrease level must lie in 2..7")
    rng = np.random.default_rng(seed)
    acc = []
    for lv in range(1, LEVELS_PER_TEST + 1):
        if lv < decrease_level:
            acc.append(100.0)
        else:
            acc.append(float(rng.uniform(30.0, 70.0)))
    acc_t = tuple(acc)
    return SessionProfile(
        name=f"planted-{decrease_level}",
        stroop_accuracy=acc_t, math_accuracy=acc_t,
        relax_bpm=70.0, test_base_bpm=74.0, hr_step_bpm=2.0,
        scr_level_counts=(0, 1, 1, 2, 2, 3, 3),
    )


def _place_scr_events(w_start: float, w_end: float, count: int,
                      rng: np.random.Generator,
                      amp_range: tuple[float, float]) -> list[tuple[float, float]]:
    """Evenly spread `count` events in a window with >= 5 s gaps."""
    if count <= 0:
        return []
    margin = 2.0
    usable = (w_end - margin) - (w_start + margin)
    spacing = usable / count
    if spacing < 5.0:
        raise ValidationError(
            f"cannot place {count} SCR events with 5 s gaps in {w_end - w_start:.1f} s"
        )
    jitter_room = max(0.0, (spacing - 5.0) / 2.0)
    out = []
    for k in range(count):
        base = w_start + margin + k * spacing
        t = base + rng.uniform(0.0, min(jitter_room, 1.0))
        out.append((float(t), float(rng.uniform(*amp_range))))
    return out


def _quantize_accuracy(acc: tuple[float, ...], per_level: int) -> tuple[list[int], tuple[float, ...]]:
    counts = [int(round(a / 100.0 * per_level)) for a in acc]
    realized = tuple(100.0 * c / per_level for c in counts)
    return counts, realized


def _gen_log_for_plan(plan: StimulusPlan, scenario_start_s: float,
                      correct_counts: list[int],
                      rng: np.random.Generator) -> list[LogRecord]:
    records = []
    t_ms = scenario_start_s * 1000.0
    for lv in range(1, LEVELS_PER_TEST + 1):
        slides = plan.slides_for_level(lv)
        n = len(slides)
        picks = rng.permutation(n) < correct_counts[lv - 1]
        for slide, correct in zip(slides, picks):
            deadline_ms = slide.deadline_s * 1000.0
            if correct:
                response = slide.expected
                latency = rng.uniform(0.25, 0.85) * deadline_ms
            else:
                mode = rng.integers(3)
                if mode == 0:  # missed
                    response, latency = None, None
                elif mode == 1:  # wrong answer in time
                    if slide.kind == "stroop":
                        others = [c for c in COLORS if c != slide.ink]
                        response = others[rng.integers(len(others))]
                    else:
                        response = str(int(slide.expected) + int(rng.integers(1, 9)))
                    latency = rng.uniform(0.25, 0.95) * deadline_ms
                else:  # right answer, too late
                    response = slide.expected
                    latency = deadline_ms * rng.uniform(1.05, 1.4)
            records.append(LogRecord(
                slide_index=slide.index,
                presented_at_ms=t_ms,
                response=response,
                responded_at_ms=None if latency is None else t_ms + latency,
            ))
            t_ms += deadline_ms
    return records


def gen_session(profile: SessionProfile, seed: int,
                include_signals: bool = True) -> SynthSession:
    """Generate a full five-scenario session with ground truth.

    The same profile with two different seeds yields different noise and
    slide draws but identical realized per-level accuracies, hence
    identical calibration outcomes.
    """
    markers = default_markers()
    stroop_sc = markers.scenario_of_kind("stroop")
    math_sc = markers.scenario_of_kind("math")
    ss = np.random.SeedSequence(seed)
    seeds = ss.generate_state(8)
    plan_stroop = generate_stroop_plan(int(seeds[0]))
    plan_math = generate_math_plan(int(seeds[1]))

    sc_counts, sc_real = _quantize_accuracy(profile.stroop_accuracy, len(plan_stroop.slides) // LEVELS_PER_TEST)
    ma_counts, ma_real = _quantize_accuracy(profile.math_accuracy, len(plan_math.slides) // LEVELS_PER_TEST)
    rng_log = np.random.default_rng(seeds[2])
    log = _gen_log_for_plan(plan_stroop, stroop_sc.start_s, sc_counts, rng_log)
    log += _gen_log_for_plan(plan_math, math_sc.start_s, ma_counts, rng_log)

    # HR profile: relax baseline, per-level steps inside tests, 2 s ramps.
    pts: list[tuple[float, float]] = [(0.0, profile.relax_bpm)]
    def step_to(t0: float, bpm: float):
        prev_bpm = pts[-1][1]
        if bpm != prev_bpm:
            pts.append((t0, prev_bpm))
            pts.append((min(t0 + 2.0, markers.session_end_s), bpm))
    for sc in markers.scenarios:
        if sc.kind == "relax":
            step_to(sc.start_s, profile.relax_bpm)
        else:
            for iv in markers.levels_for(sc.id):
                step_to(iv.start_s, profile.test_base_bpm + profile.hr_step_bpm * (iv.level - 1))
    hr = HrProfile(tuple(pts))

    # SCR events: per-level counts inside tests, a fixed count per relax block.
    rng_scr = np.random.default_rng(seeds[3])
    scr_events: list[tuple[float, float]] = []
    for sc in markers.scenarios:
        if sc.kind == "relax":
            scr_events += _place_scr_events(sc.start_s, sc.end_s, profile.scr_relax_count,
                                            rng_scr, profile.scr_amp_range_uS)
        else:
            for iv in markers.levels_for(sc.id):
                scr_events += _place_scr_events(
                    iv.start_s, iv.end_s, profile.scr_level_counts[iv.level - 1],
                    rng_scr, profile.scr_amp_range_uS)
    scr_events.sort()

    duration = markers.session_end_s
    series: dict[str, TimeSeries] = {}
    truth_beats = np.empty(0)
    if include_signals:
        ecg, truth_beats = gen_ecg(EcgSpec(
            seed=int(seeds[4]), duration_s=duration, hr=hr,
            sampling_rate_hz=profile.ecg_rate_hz, snr_db=profile.ecg_snr_db))
        bvp, _ = gen_bvp(BvpSpec(
            seed=int(seeds[5]), duration_s=duration, hr=hr,
            sampling_rate_hz=profile.bvp_rate_hz, snr_db=profile.bvp_snr_db))
        gsr, _ = gen_gsr(GsrSpec(
            seed=int(seeds[6]), duration_s=duration,
            sampling_rate_hz=profile.gsr_rate_hz, tonic_uS=profile.tonic_uS,
            events=tuple(scr_events), snr_db=profile.gsr_snr_db))
        emg, _ = gen_emg(EmgSpec(
            seed=int(seeds[7]), duration_s=duration,
            sampling_rate_hz=profile.emg_rate_hz, bursts=profile.emg_bursts))
        series = {"ECG": ecg, "BVP": bvp, "GSR": gsr, "EMG": emg}
    else:
        truth_beats = beat_times_from_profile(hr, duration)

    return SynthSession(
        profile=profile, seed=seed, markers=markers, series=series,
        stroop_plan=plan_stroop, math_plan=plan_math, log=log,
        truth_beats=truth_beats, truth_scr_events=scr_events,
        truth_emg_bursts=list(profile.emg_bursts),
        realized_stroop_accuracy=sc_real, realized_math_accuracy=ma_real,
    )


PROFILES = {
    "calm": calm_profile,
    "stressed": stressed_profile,
}
