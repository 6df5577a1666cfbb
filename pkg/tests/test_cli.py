"""End-to-end checks of the command-line front end.

Commands run in-process through cli.main() so exit codes and messages
are asserted directly; the expensive synth+process pipelines run once
per profile and are shared across the module.
"""
from __future__ import annotations

import csv
import json

import pytest

from stresscal import cli


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def stressed_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli_stressed")
    assert run("synth", "--profile", "stressed", "--seed", 7, "--out", d) == 0
    assert run("process", "--manifest", d / "manifest.json",
               "--markers", d / "markers.json", "--out", d) == 0
    return d


@pytest.fixture(scope="module")
def calm_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli_calm")
    assert run("synth", "--profile", "calm", "--seed", 3, "--out", d) == 0
    assert run("process", "--manifest", d / "manifest.json",
               "--markers", d / "markers.json", "--out", d) == 0
    return d


def _calibrate(d, delta=None):
    argv = ["calibrate", "--manifest", d / "manifest.json",
            "--markers", d / "markers.json",
            "--plan", d / "stroop_plan.json", "--plan", d / "math_plan.json",
            "--log", d / "session_log.jsonl", "--out", d]
    if delta is not None:
        argv += ["--delta", delta]
    return run(*argv)


# --- synth ------------------------------------------------------------------

def test_synth_session_writes_the_full_bundle(stressed_dir):
    for name in ("manifest.json", "markers.json", "stroop_plan.json",
                 "math_plan.json", "session_log.jsonl",
                 "ecg.csv", "bvp.csv", "gsr.csv", "emg.csv"):
        assert (stressed_dir / name).is_file(), name
    for name in ("ecg_beats.txt", "scr_events.csv", "emg_bursts.csv"):
        assert (stressed_dir / "truth" / name).is_file(), name
    log_lines = (stressed_dir / "session_log.jsonl").read_text().splitlines()
    assert len(log_lines) == 105 + 49


def test_synth_rejects_unknown_profile(tmp_path, capsys):
    assert run("synth", "--profile", "zen", "--out", tmp_path) == 2
    assert "unknown profile" in capsys.readouterr().err


def test_synth_single_channel_round_trips(tmp_path, capsys):
    assert run("synth", "--kind", "ecg", "--hr", 60, "--duration", 60,
               "--out", tmp_path) == 0
    assert (tmp_path / "ecg.csv").is_file()
    assert (tmp_path / "truth_beats.txt").is_file()
    truth = [float(x) for x in
             (tmp_path / "truth_beats.txt").read_text().split()]
    assert len(truth) == 60
    assert run("validate", "--manifest", tmp_path / "manifest.json") == 0
    assert "validation passed" in capsys.readouterr().out


# --- validate ------------------------------------------------------------------

def test_validate_full_session(stressed_dir, capsys):
    assert run("validate", "--manifest", stressed_dir / "manifest.json",
               "--markers", stressed_dir / "markers.json") == 0
    out = capsys.readouterr().out
    assert "ok: manifest for subject 'synthetic-stressed-7' (4 channels)" in out
    assert "validation passed" in out


def test_validate_warns_about_missing_channels(tmp_path, capsys):
    assert run("synth", "--kind", "ecg", "--duration", 30, "--out", tmp_path) == 0
    assert run("validate", "--manifest", tmp_path / "manifest.json") == 0
    out = capsys.readouterr().out
    for kind in ("BVP", "GSR", "EMG"):
        assert f"warning: no {kind} channel" in out
    assert "validation passed" in out


def test_validate_rejects_non_contiguous_markers(stressed_dir, tmp_path, capsys):
    bad = {
        "scenarios": [
            {"id": "I", "kind": "relax", "start_s": 0.0, "end_s": 240.0},
            {"id": "II", "kind": "relax", "start_s": 300.0, "end_s": 540.0},
        ],
        "levels": [],
    }
    p = tmp_path / "markers.json"
    p.write_text(json.dumps(bad))
    assert run("validate", "--manifest", stressed_dir / "manifest.json",
               "--markers", p) == 2
    assert "contiguous" in capsys.readouterr().err


def test_validate_reports_corrupt_channel_files(tmp_path, capsys):
    assert run("synth", "--kind", "ecg", "--duration", 30, "--out", tmp_path) == 0
    path = tmp_path / "ecg.csv"
    path.write_text(path.read_text() + "not,a,sample\n")
    assert run("validate", "--manifest", tmp_path / "manifest.json") == 2
    err = capsys.readouterr().err
    assert "ecg.csv" in err


def test_validate_missing_manifest(tmp_path, capsys):
    assert run("validate", "--manifest", tmp_path / "nope.json") == 2
    assert "manifest not found" in capsys.readouterr().err


# --- process ----------------------------------------------------------------------

def test_process_exports_all_event_files(stressed_dir):
    for name in ("beats_ecg.txt", "beats_bvp.txt", "scr_events.csv", "emg_bursts.csv"):
        assert (stressed_dir / name).is_file(), name
    beats = (stressed_dir / "beats_ecg.txt").read_text().split()
    assert 1300 < len(beats) < 1700  # ~72-87 bpm over 20 minutes


def test_process_requires_ecg(tmp_path, capsys):
    assert run("synth", "--kind", "gsr", "--duration", 60, "--out", tmp_path) == 0
    assert run("process", "--manifest", tmp_path / "manifest.json",
               "--out", tmp_path / "out") == 2
    assert "requires an ECG channel" in capsys.readouterr().err


# --- features ----------------------------------------------------------------------

def test_features_writes_one_row_per_window(stressed_dir, capsys):
    assert run("features", "--manifest", stressed_dir / "manifest.json",
               "--markers", stressed_dir / "markers.json",
               "--out", stressed_dir) == 0
    assert "wrote 19 feature rows" in capsys.readouterr().out
    lines = (stressed_dir / "features.csv").read_text().splitlines()
    assert len(lines) == 20
    assert lines[0].startswith("label,hr_mean_bpm")


# --- calibrate ----------------------------------------------------------------------

def test_calibrate_stressed_session(stressed_dir, capsys):
    assert _calibrate(stressed_dir) == 0
    out = capsys.readouterr().out
    assert "stroop: decrease at level 6, optimal level 5" in out
    assert "math: decrease at level 2, optimal level 1" in out

    doc = json.loads((stressed_dir / "calibration.json").read_text())
    assert doc["tests"]["stroop"]["decrease_level"] == 6
    assert doc["tests"]["stroop"]["optimal_level"] == 5
    # 0+1+2+3+4 seeded events precede the level-6 window
    assert doc["tests"]["stroop"]["gsr_peaks_until_decrease"] == 10
    assert doc["tests"]["stroop"]["hr_increment_bpm"] == pytest.approx(12.5, abs=0.5)
    assert doc["accuracy_pct"]["stroop"] == pytest.approx(
        [100.0, 100.0, 100.0, 100.0, 1400.0 / 15.0, 80.0, 800.0 / 15.0])

    with open(stressed_dir / "calibration.csv", newline="") as fh:
        header, row = list(csv.reader(fh))
    got = dict(zip(header, row))
    assert got["subject_id"] == "synthetic-stressed-7"
    assert got["stroop_decrease_level"] == "6"

    for name in ("accuracy_levels.svg", "level_features.svg", "slopes.svg"):
        p = stressed_dir / name
        assert p.is_file() and p.stat().st_size > 1000, name
        assert p.read_text().lstrip().startswith("<?xml")


def test_calibrate_calm_session_finds_no_decrease(calm_dir, capsys):
    assert _calibrate(calm_dir) == 0
    out = capsys.readouterr().out
    assert out.count("no sustained accuracy decrease") == 2
    doc = json.loads((calm_dir / "calibration.json").read_text())
    assert doc["tests"]["stroop"]["decrease_level"] is None
    assert doc["tests"]["math"]["decrease_level"] is None
    with open(calm_dir / "calibration.csv", newline="") as fh:
        header, row = list(csv.reader(fh))
    assert dict(zip(header, row))["stroop_decrease_level"] == ""


def test_calibrate_delta_shifts_the_detected_level(stressed_dir, capsys):
    def stroop_level(delta):
        assert _calibrate(stressed_dir, delta=delta) == 0
        capsys.readouterr()
        doc = json.loads((stressed_dir / "calibration.json").read_text())
        return doc["tests"]["stroop"]["decrease_level"]

    # realized accuracies 100,100,100,100,93.3,80,53.3: a 5 % margin
    # already trips at level 5, 20 % not until level 6
    assert stroop_level(5) == 5
    assert stroop_level(20) == 6


def test_calibrate_requires_both_plans(stressed_dir, capsys):
    assert run("calibrate", "--manifest", stressed_dir / "manifest.json",
               "--markers", stressed_dir / "markers.json",
               "--plan", stressed_dir / "stroop_plan.json",
               "--log", stressed_dir / "session_log.jsonl",
               "--out", stressed_dir) == 2
    assert "both plans" in capsys.readouterr().err


def test_calibrate_missing_manifest(stressed_dir, tmp_path, capsys):
    assert run("calibrate", "--manifest", tmp_path / "gone.json",
               "--markers", stressed_dir / "markers.json",
               "--plan", stressed_dir / "stroop_plan.json",
               "--plan", stressed_dir / "math_plan.json",
               "--log", stressed_dir / "session_log.jsonl",
               "--out", stressed_dir) == 2
    assert "manifest not found" in capsys.readouterr().err


# --- report -------------------------------------------------------------------------

def test_report_rerenders_figures(stressed_dir, capsys):
    assert run("report", "--manifest", stressed_dir / "manifest.json",
               "--markers", stressed_dir / "markers.json",
               "--out", stressed_dir) == 0
    assert "figures ->" in capsys.readouterr().out
    for name in ("level_features.svg", "slopes.svg"):
        assert (stressed_dir / name).stat().st_size > 1000
