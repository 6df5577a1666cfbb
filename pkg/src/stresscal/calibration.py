"""Individual performance calibration from per-level scores.

The working hypothesis is an inverted-U between arousal and output: as
difficulty rises, accuracy holds (or climbs) until load crosses the
subject's tipping point, then falls off.  The calibration point is the
first sustained accuracy drop; the level just before it is taken as the
subject's best operating level, annotated with how much the heart rate
rose and how many skin-conductance responses accumulated by then.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cardiac import HrSeries, hr_stats
from .core import LEVELS_PER_TEST, SessionMarkers, Window
from .eda import ScrEvent
from .errors import ValidationError
from .protocol import PerformanceRecord


@dataclass(frozen=True)
class CalibrationConfig:
    """`delta_pct` is the accuracy drop that counts as a decrease; with
    `sustain` set, accuracy must also stay below runningMax - delta/2
    for every later level (a one-level dip does not count)."""

    delta_pct: float = 10.0
    sustain: bool = True

    def __post_init__(self):
        if not (0.0 < self.delta_pct < 100.0):
            raise ValidationError("delta_pct must lie in (0, 100)")


@dataclass(frozen=True)
class TestCalibration:
    """Calibration outcome for one test block; None when no decrease."""

    test: str  # "stroop" | "math"
    decrease_level: int | None
    optimal_level: int | None
    hr_increment_bpm: float | None
    gsr_peaks_until_decrease: int | None


@dataclass(frozen=True)
class SubjectCalibration:
    subject_id: str
    stroop: TestCalibration
    math: TestCalibration
    delta_pct: float


def detect_decrease_level(records: list[PerformanceRecord],
                          cfg: CalibrationConfig = CalibrationConfig()) -> int | None:
    """Smallest level whose accuracy drops `delta_pct` below the running max.

    Requires exactly one record per level 1..7.  Returns None when no
    level qualifies.  With `sustain`, a candidate is rejected if any
    later level climbs back above runningMax - delta_pct/2.
    """
    recs = sorted(records, key=lambda r: r.level)
    if [r.level for r in recs] != list(range(1, LEVELS_PER_TEST + 1)):
        raise ValidationError(
            f"need exactly one record per level 1..{LEVELS_PER_TEST}, "
            f"got levels {[r.level for r in records]}"
        )
    acc = [r.accuracy_pct for r in recs]
    for lv in range(2, LEVELS_PER_TEST + 1):
        running_max = max(acc[:lv - 1])
        if acc[lv - 1] > running_max - cfg.delta_pct:
            continue
        if cfg.sustain and any(
            a > running_max - cfg.delta_pct / 2.0 for a in acc[lv:]
        ):
            continue
        return lv
    return None


def optimal_level(decrease_level: int | None) -> int | None:
    """The level just before the decrease: the subject's best load."""
    if decrease_level is None:
        return None
    if not (2 <= decrease_level <= LEVELS_PER_TEST):
        raise ValidationError(f"decrease level {decrease_level} out of range 2..{LEVELS_PER_TEST}")
    return decrease_level - 1


def hr_increment(hr: HrSeries, levels: list[Window], decrease_level: int) -> float:
    """Mean-HR rise from the level-1 window to the decrease-level window."""
    if len(levels) != LEVELS_PER_TEST:
        raise ValidationError(f"need {LEVELS_PER_TEST} level windows, got {len(levels)}")
    if not (2 <= decrease_level <= LEVELS_PER_TEST):
        raise ValidationError(f"decrease level {decrease_level} out of range")
    first_mean, _ = hr_stats(hr, levels[0])
    drop_mean, _ = hr_stats(hr, levels[decrease_level - 1])
    return drop_mean - first_mean


def gsr_peaks_until(scrs: list[ScrEvent], levels: list[Window],
                    decrease_level: int) -> int:
    """SCR events whose peak precedes the start of the decrease window."""
    if len(levels) != LEVELS_PER_TEST:
        raise ValidationError(f"need {LEVELS_PER_TEST} level windows, got {len(levels)}")
    if not (2 <= decrease_level <= LEVELS_PER_TEST):
        raise ValidationError(f"decrease level {decrease_level} out of range")
    boundary = levels[decrease_level - 1].start_s
    return sum(1 for e in scrs if e.peak_s < boundary)


def _calibrate_test(test: str, records: list[PerformanceRecord],
                    levels: list[Window], hr: HrSeries,
                    scrs: list[ScrEvent] | None,
                    cfg: CalibrationConfig) -> TestCalibration:
    dec = detect_decrease_level(records, cfg)
    if dec is None:
        return TestCalibration(test, None, None, None, None)
    scoped = None
    if scrs is not None:
        lo = levels[0].start_s
        hi = levels[-1].end_s
        scoped = [e for e in scrs if lo <= e.peak_s < hi]
    return TestCalibration(
        test=test,
        decrease_level=dec,
        optimal_level=optimal_level(dec),
        hr_increment_bpm=hr_increment(hr, levels, dec),
        gsr_peaks_until_decrease=None if scoped is None else gsr_peaks_until(scoped, levels, dec),
    )


def calibrate_subject(subject_id: str,
                      stroop_records: list[PerformanceRecord],
                      math_records: list[PerformanceRecord],
                      hr: HrSeries,
                      scrs: list[ScrEvent] | None,
                      markers: SessionMarkers,
                      cfg: CalibrationConfig = CalibrationConfig()) -> SubjectCalibration:
    """Per-test calibration for one subject.

    SCR events are restricted to each test's scenario before counting so
    responses from the relax blocks do not inflate the totals; a missing
    GSR channel (scrs=None) propagates None into the counts.
    """
    out = {}
    for test, records in (("stroop", stroop_records), ("math", math_records)):
        sc = markers.scenario_of_kind(test)
        levels = [iv.window() for iv in markers.levels_for(sc.id)]
        out[test] = _calibrate_test(test, records, levels, hr, scrs, cfg)
    return SubjectCalibration(subject_id=subject_id, stroop=out["stroop"],
                              math=out["math"], delta_pct=cfg.delta_pct)


CALIBRATION_COLUMNS = (
    "subject_id", "delta_pct",
    "stroop_decrease_level", "stroop_optimal_level",
    "stroop_hr_increment_bpm", "stroop_gsr_peaks",
    "math_decrease_level", "math_optimal_level",
    "math_hr_increment_bpm", "math_gsr_peaks",
)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_calibration_csv(cal: SubjectCalibration, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CALIBRATION_COLUMNS)
        writer.writerow([
            cal.subject_id, _cell(cal.delta_pct),
            _cell(cal.stroop.decrease_level), _cell(cal.stroop.optimal_level),
            _cell(cal.stroop.hr_increment_bpm), _cell(cal.stroop.gsr_peaks_until_decrease),
            _cell(cal.math.decrease_level), _cell(cal.math.optimal_level),
            _cell(cal.math.hr_increment_bpm), _cell(cal.math.gsr_peaks_until_decrease),
        ])


def write_calibration_json(cal: SubjectCalibration,
                           records: dict[str, list[PerformanceRecord]],
                           path: str | Path) -> None:
    """Structured summary: outcome plus the per-level accuracy it came from."""
    def test_doc(tc: TestCalibration) -> dict:
        return {
            "decrease_level": tc.decrease_level,
            "optimal_level": tc.optimal_level,
            "hr_increment_bpm": tc.hr_increment_bpm,
            "gsr_peaks_until_decrease": tc.gsr_peaks_until_decrease,
        }
    doc = {
        "subject_id": cal.subject_id,
        "delta_pct": cal.delta_pct,
        "tests": {"stroop": test_doc(cal.stroop), "math": test_doc(cal.math)},
        "accuracy_pct": {
            name: [r.accuracy_pct for r in sorted(recs, key=lambda r: r.level)]
            for name, recs in records.items()
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
