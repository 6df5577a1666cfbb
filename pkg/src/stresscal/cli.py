"""Command-line front end.

Subcommands: validate, process, features, calibrate, synth, report.
Exit codes: 0 on success, 2 for input/validation problems, 3 for
processing failures.  All outputs are deterministic: rerunning a
command on the same inputs reproduces every output file byte for byte.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import calibration as calib
from . import core, eda, emg, events_io, features as feats, protocol, report, synth
from .cardiac import beats_to_hr, detect_bvp_peaks, detect_r_peaks
from .errors import ProcessingError, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PROCESSING = 3

BEATS_ECG = "beats_ecg.txt"
BEATS_BVP = "beats_bvp.txt"
SCR_EVENTS = "scr_events.csv"
EMG_BURSTS = "emg_bursts.csv"
FEATURES_CSV = "features.csv"
CALIBRATION_CSV = "calibration.csv"
CALIBRATION_JSON = "calibration.json"


def _say(msg: str) -> None:
    print(msg)


def cmd_validate(args) -> int:
    manifest = core.load_manifest(args.manifest)
    _say(f"ok: manifest for subject {manifest.subject_id!r} "
         f"({len(manifest.entries)} channels)")
    channels = core.load_channels(manifest)
    for kind, series in channels.items():
        _say(f"ok: {kind} {series.n_samples} samples at {series.sampling_rate_hz:g} Hz "
             f"({series.duration_s:.1f} s)")
    for kind in core.CHANNEL_KINDS:
        if kind not in channels:
            _say(f"warning: no {kind} channel; dependent features will be empty")
    if args.markers:
        markers = core.load_markers(args.markers)
        _say(f"ok: markers with {len(markers.scenarios)} scenarios, "
             f"{len(markers.levels)} level intervals, session ends {markers.session_end_s:g} s")
        for kind, series in channels.items():
            if series.end_s < markers.session_end_s - 1.0:
                _say(f"warning: {kind} ends at {series.end_s:.1f} s, "
                     f"before the session end {markers.session_end_s:g} s")
    _say("validation passed")
    return EXIT_OK


def cmd_process(args) -> int:
    manifest = core.load_manifest(args.manifest)
    markers = core.load_markers(args.markers) if args.markers else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    channels = core.load_channels(manifest)

    ecg = channels.get("ECG")
    if ecg is None:
        raise ValidationError("processing requires an ECG channel")
    beats = detect_r_peaks(ecg)
    events_io.write_beats(beats, out / BEATS_ECG)
    _say(f"ECG: {beats.n_beats} beats -> {out / BEATS_ECG}")

    if "BVP" in channels:
        bvp_beats = detect_bvp_peaks(channels["BVP"])
        events_io.write_beats(bvp_beats, out / BEATS_BVP)
        _say(f"BVP: {bvp_beats.n_beats} beats -> {out / BEATS_BVP}")

    if "GSR" in channels:
        dec = eda.decompose(channels["GSR"])
        scrs = eda.detect_scr_events(dec)
        events_io.write_scr_events(scrs, out / SCR_EVENTS)
        _say(f"GSR: {len(scrs)} SCR events (residual rms "
             f"{dec.residual_rms_uS:.2e} uS) -> {out / SCR_EVENTS}")

    if "EMG" in channels:
        env = emg.emg_envelope(channels["EMG"])
        baseline = None
        if markers is not None:
            first_relax = next((sc for sc in markers.scenarios if sc.kind == "relax"), None)
            if first_relax is not None:
                baseline = core.Window(first_relax.start_s, first_relax.end_s)
        bursts = emg.detect_bursts(env, emg.BurstConfig(baseline=baseline))
        events_io.write_emg_bursts(bursts, out / EMG_BURSTS)
        _say(f"EMG: {len(bursts)} bursts -> {out / EMG_BURSTS}")
    return EXIT_OK


def _load_processed(out: Path, manifest: core.ChannelManifest) -> feats.ProcessedSession:
    ecg_beats = events_io.load_beats(out / BEATS_ECG, "ECG")
    bvp_beats = scrs = bursts = None
    if manifest.entry("BVP") is not None and (out / BEATS_BVP).exists():
        bvp_beats = events_io.load_beats(out / BEATS_BVP, "BVP")
    if manifest.entry("GSR") is not None and (out / SCR_EVENTS).exists():
        scrs = events_io.load_scr_events(out / SCR_EVENTS)
    if manifest.entry("EMG") is not None and (out / EMG_BURSTS).exists():
        bursts = events_io.load_emg_bursts(out / EMG_BURSTS)
    return feats.ProcessedSession(ecg_beats=ecg_beats, bvp_beats=bvp_beats,
                                  scr_events=scrs, emg_bursts=bursts)


def cmd_features(args) -> int:
    manifest = core.load_manifest(args.manifest)
    markers = core.load_markers(args.markers)
    out = Path(args.out)
    data = _load_processed(out, manifest)
    rows = feats.feature_table(data, markers)
    feats.write_feature_table(rows, out / FEATURES_CSV)
    _say(f"wrote {len(rows)} feature rows -> {out / FEATURES_CSV}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    manifest = core.load_manifest(args.manifest)
    markers = core.load_markers(args.markers)
    if len(args.plan or []) != 2:
        raise ValidationError("calibrate needs both plans (pass --plan twice)")
    plans = [protocol.load_plan(p) for p in args.plan]
    kinds = sorted(p.kind for p in plans)
    if kinds != ["math", "stroop"]:
        raise ValidationError(f"expected one stroop and one math plan, got {kinds}")
    by_kind = {p.kind: p for p in plans}
    records = protocol.load_log(args.log)
    parts = protocol.split_log([by_kind["stroop"], by_kind["math"]], records)
    stroop_scores = protocol.score_session(by_kind["stroop"], parts[0])
    math_scores = protocol.score_session(by_kind["math"], parts[1])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = _load_processed(out, manifest)
    hr = beats_to_hr(data.ecg_beats)
    cfg = calib.CalibrationConfig(delta_pct=args.delta)
    cal = calib.calibrate_subject(manifest.subject_id, stroop_scores, math_scores,
                                  hr, data.scr_events, markers, cfg)
    calib.write_calibration_csv(cal, out / CALIBRATION_CSV)
    calib.write_calibration_json(
        cal, {"stroop": stroop_scores, "math": math_scores}, out / CALIBRATION_JSON)
    for test, tc in (("stroop", cal.stroop), ("math", cal.math)):
        if tc.decrease_level is None:
            _say(f"{test}: no sustained accuracy decrease (delta {cfg.delta_pct:g})")
        else:
            _say(f"{test}: decrease at level {tc.decrease_level}, "
                 f"optimal level {tc.optimal_level}, "
                 f"HR +{tc.hr_increment_bpm:.2f} bpm, "
                 f"SCR peaks until decrease: {tc.gsr_peaks_until_decrease}")

    accuracy = {"stroop": [r.accuracy_pct for r in stroop_scores],
                "math": [r.accuracy_pct for r in math_scores]}
    report.plot_accuracy_levels(accuracy, cal, out / "accuracy_levels.svg")
    rows = feats.feature_table(data, markers)
    feats.write_feature_table(rows, out / FEATURES_CSV)
    report.plot_level_features(rows, markers, out / "level_features.svg")
    report.plot_slopes(hr, data.scr_events, markers, out / "slopes.svg")
    _say(f"calibration and figures -> {out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind:
        return _synth_single(args, out)
    profile = synth.PROFILES.get(args.profile)
    if profile is None:
        raise ValidationError(
            f"unknown profile {args.profile!r}; choose from {sorted(synth.PROFILES)}")
    session = synth.gen_session(profile(), args.seed)
    _write_session(session, out)
    _say(f"synthetic session ({args.profile}, seed {args.seed}) -> {out}")
    return EXIT_OK


def _write_session(session: synth.SynthSession, out: Path) -> None:
    names = {"ECG": "ecg.csv", "BVP": "bvp.csv", "GSR": "gsr.csv", "EMG": "emg.csv"}
    entries = []
    for kind, series in session.series.items():
        core.write_series(series, out / names[kind])
        entries.append(core.ManifestEntry(names[kind], kind, series.sampling_rate_hz,
                                          core.CHANNEL_UNITS[kind]))
    manifest = core.ChannelManifest(
        subject_id=f"synthetic-{session.profile.name}-{session.seed}",
        entries=tuple(entries), base_dir=out)
    core.save_manifest(manifest, out / "manifest.json")
    core.save_markers(session.markers, out / "markers.json")
    protocol.save_plan(session.stroop_plan, out / "stroop_plan.json")
    protocol.save_plan(session.math_plan, out / "math_plan.json")
    protocol.save_log(session.log, out / "session_log.jsonl")
    truth = out / "truth"
    truth.mkdir(exist_ok=True)
    from .cardiac import BeatSeries
    events_io.write_beats(BeatSeries(session.truth_beats, "ECG"), truth / "ecg_beats.txt")
    peak_lag = eda.BatemanKernel().peak_offset_s
    events_io.write_scr_events(
        [eda.ScrEvent(onset_s=t, peak_s=t + peak_lag, amplitude_uS=a)
         for t, a in session.truth_scr_events],
        truth / "scr_events.csv")
    events_io.write_emg_bursts(
        [emg.EmgBurst(start_s=s, end_s=e, peak_amplitude_mV=a)
         for s, e, a in session.truth_emg_bursts],
        truth / "emg_bursts.csv")


def _synth_single(args, out: Path) -> int:
    kind = args.kind.upper()
    dur = args.duration
    if kind == "ECG":
        series, truth = synth.gen_ecg(synth.EcgSpec(
            seed=args.seed, duration_s=dur, hr=synth.HrProfile.constant(args.hr),
            sampling_rate_hz=args.rate or 256.0, snr_db=args.snr))
        truth_path = out / "truth_beats.txt"
        from .cardiac import BeatSeries
        events_io.write_beats(BeatSeries(truth, "ECG"), truth_path)
    elif kind == "BVP":
        series, truth = synth.gen_bvp(synth.BvpSpec(
            seed=args.seed, duration_s=dur, hr=synth.HrProfile.constant(args.hr),
            sampling_rate_hz=args.rate or 64.0, snr_db=args.snr))
        truth_path = out / "truth_beats.txt"
        from .cardiac import BeatSeries
        events_io.write_beats(BeatSeries(truth, "BVP"), truth_path)
    elif kind == "GSR":
        rng = np.random.default_rng(args.seed)
        n = max(2, int(dur // 20))
        times = np.linspace(5.0, dur - 25.0, n)
        events = tuple((float(t), float(rng.uniform(0.1, 0.5))) for t in times)
        series, truth = synth.gen_gsr(synth.GsrSpec(
            seed=args.seed, duration_s=dur, sampling_rate_hz=args.rate or 16.0,
            events=events, snr_db=args.snr))
        events_io.write_scr_events(
            [eda.ScrEvent(onset_s=t, peak_s=t, amplitude_uS=a) for t, a in truth],
            out / "truth_scr_events.csv")
    elif kind == "EMG":
        bursts = ((dur * 0.3, dur * 0.3 + 1.0, 0.4), (dur * 0.7, dur * 0.7 + 1.5, 0.6))
        series, truth = synth.gen_emg(synth.EmgSpec(
            seed=args.seed, duration_s=dur, sampling_rate_hz=args.rate or 256.0,
            bursts=bursts))
        events_io.write_emg_bursts(
            [emg.EmgBurst(start_s=s, end_s=e, peak_amplitude_mV=a) for s, e, a in truth],
            out / "truth_emg_bursts.csv")
    else:
        raise ValidationError(f"unknown channel kind {args.kind!r}")
    name = f"{kind.lower()}.csv"
    core.write_series(series, out / name)
    manifest = core.ChannelManifest(
        subject_id=f"synthetic-{kind.lower()}-{args.seed}",
        entries=(core.ManifestEntry(name, kind, series.sampling_rate_hz,
                                    core.CHANNEL_UNITS[kind]),),
        base_dir=out)
    core.save_manifest(manifest, out / "manifest.json")
    _say(f"synthetic {kind} ({dur:g} s, seed {args.seed}) -> {out}")
    return EXIT_OK


def cmd_report(args) -> int:
    manifest = core.load_manifest(args.manifest)
    markers = core.load_markers(args.markers)
    out = Path(args.out)
    data = _load_processed(out, manifest)
    hr = beats_to_hr(data.ecg_beats)
    rows = feats.feature_table(data, markers)
    feats.write_feature_table(rows, out / FEATURES_CSV)
    report.plot_level_features(rows, markers, out / "level_features.svg")
    report.plot_slopes(hr, data.scr_events, markers, out / "slopes.svg")
    _say(f"figures -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stresscal",
        description="Physiological stress features and performance calibration.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, helptext):
        p = sub.add_parser(name, help=helptext)
        p.set_defaults(fn=fn)
        return p

    p = add("validate", cmd_validate, "check a manifest (and markers) for consistency")
    p.add_argument("--manifest", required=True)
    p.add_argument("--markers")

    p = add("process", cmd_process, "run all detectors, export event files")
    p.add_argument("--manifest", required=True)
    p.add_argument("--markers")
    p.add_argument("--out", required=True)

    p = add("features", cmd_features, "compute the per-window feature table")
    p.add_argument("--manifest", required=True)
    p.add_argument("--markers", required=True)
    p.add_argument("--out", required=True)

    p = add("calibrate", cmd_calibrate, "score the session and calibrate the subject")
    p.add_argument("--manifest", required=True)
    p.add_argument("--markers", required=True)
    p.add_argument("--plan", action="append")
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--delta", type=float, default=10.0)

    p = add("synth", cmd_synth, "generate synthetic sessions or single channels")
    p.add_argument("--profile", default="stressed")
    p.add_argument("--kind", help="single-channel mode: ecg|bvp|gsr|emg")
    p.add_argument("--hr", type=float, default=60.0)
    p.add_argument("--duration", type=float, default=60.0)
    p.add_argument("--rate", type=float)
    p.add_argument("--snr", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("report", cmd_report, "re-render figures from processed artifacts")
    p.add_argument("--manifest", required=True)
    p.add_argument("--markers", required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ProcessingError as exc:
        print(f"processing error: {exc}", file=sys.stderr)
        return EXIT_PROCESSING


if __name__ == "__main__":
    sys.exit(main())
