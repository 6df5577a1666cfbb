"""Text export/import for detected event streams.

Beat series are one `t_s` per line; SCR events and EMG bursts are CSV
with a fixed header.  Writers use shortest round-trip float formatting
so write(load(f)) is byte-identical for canonical files.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .cardiac import BeatSeries
from .eda import ScrEvent
from .emg import EmgBurst
from .errors import ValidationError

SCR_HEADER = ["onset_s", "peak_s", "amplitude_uS"]
BURST_HEADER = ["start_s", "end_s", "peak_amplitude_mV"]


def write_beats(beats: BeatSeries, path: str | Path) -> None:
    lines = [repr(float(t)) for t in beats.beat_times_s]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_beats(path: str | Path, source: str) -> BeatSeries:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValidationError(f"beat file not found: {path}")
    try:
        times = np.array([float(x) for x in raw.split()])
    except ValueError as exc:
        raise ValidationError(f"{path}: unparseable beat time ({exc})") from exc
    return BeatSeries(times, source)


def _write_csv(path: str | Path, header: list[str], rows: list[list[float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) for x in row])


def _read_csv(path: str | Path, header: list[str]) -> list[list[float]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            got = next(reader, None)
            if got != header:
                raise ValidationError(f"{path}: expected header {','.join(header)}")
            out = []
            for row in reader:
                if len(row) != len(header):
                    raise ValidationError(f"{path}: bad row {row}")
                out.append([float(x) for x in row])
            return out
    except FileNotFoundError:
        raise ValidationError(f"event file not found: {path}")
    except ValueError as exc:
        raise ValidationError(f"{path}: unparseable value ({exc})") from exc


def write_scr_events(events: list[ScrEvent], path: str | Path) -> None:
    _write_csv(path, SCR_HEADER,
               [[e.onset_s, e.peak_s, e.amplitude_uS] for e in events])


def load_scr_events(path: str | Path) -> list[ScrEvent]:
    return [ScrEvent(onset_s=r[0], peak_s=r[1], amplitude_uS=r[2])
            for r in _read_csv(path, SCR_HEADER)]


def write_emg_bursts(bursts: list[EmgBurst], path: str | Path) -> None:
    _write_csv(path, BURST_HEADER,
               [[b.start_s, b.end_s, b.peak_amplitude_mV] for b in bursts])


def load_emg_bursts(path: str | Path) -> list[EmgBurst]:
    return [EmgBurst(start_s=r[0], end_s=r[1], peak_amplitude_mV=r[2])
            for r in _read_csv(path, BURST_HEADER)]
