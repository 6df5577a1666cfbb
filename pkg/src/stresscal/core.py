"""Typed time-series containers, session markers, and channel file I/O.

Everything here is immutable after construction and all operations are
pure functions, so channels can be loaded and processed independently.
Channel files are plain UTF-8 text with a ``t_s,value`` header and one
sample per line; manifests and markers are JSON documents.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError

CHANNEL_KINDS = ("ECG", "BVP", "GSR", "EMG")

#: Units expected in manifests for each channel kind.
CHANNEL_UNITS = {"ECG": "mV", "BVP": "a.u.", "GSR": "uS", "EMG": "mV"}

SCENARIO_KINDS = ("relax", "stroop", "math")

#: Session timeline: five scenarios, relax blocks interleaved with the
#: two test blocks, durations in seconds (4/4/4/5/3 minutes).
SCENARIO_PLAN = (
    ("I", "relax", 240.0),
    ("II", "stroop", 240.0),
    ("III", "relax", 240.0),
    ("IV", "math", 300.0),
    ("V", "relax", 180.0),
)

LEVELS_PER_TEST = 7

SERIES_HEADER = "t_s,value"

#: Matching timestamps may carry float round-off; boundaries compare
#: within this absolute tolerance (seconds).
TIME_EPS = 1e-9


def _fmt(x: float) -> str:
    """Canonical text form for a float: shortest round-trip repr."""
    return repr(float(x))


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled channel segment.

    Attributes
    ----------
    channel_kind : str
        One of ``ECG | BVP | GSR | EMG``.
    sampling_rate_hz : float
        Sampling rate, strictly positive.
    start_s : float
        Session-relative time of the first sample.
    values : np.ndarray
        Sample values; finite floats, at least one sample.
    """

    channel_kind: str
    sampling_rate_hz: float
    start_s: float
    values: np.ndarray

    def __post_init__(self):
        if self.channel_kind not in CHANNEL_KINDS:
            raise ValidationError(f"unknown channel kind {self.channel_kind!r}")
        if not (self.sampling_rate_hz > 0):
            raise ValidationError("sampling_rate_hz must be > 0")
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 1:
            raise ValidationError("values must be a non-empty 1-d array")
        if not np.all(np.isfinite(vals)):
            raise ValidationError(f"{self.channel_kind}: non-finite sample values")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n_samples(self) -> int:
        return int(self.values.size)

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sampling_rate_hz

    @property
    def end_s(self) -> float:
        """Time just past the last sample (start of the next would-be sample)."""
        return self.start_s + self.duration_s

    def times(self) -> np.ndarray:
        """Session-relative sample times."""
        return self.start_s + np.arange(self.n_samples) / self.sampling_rate_hz


@dataclass(frozen=True)
class Window:
    """Half-open session-relative time interval [start_s, end_s)."""

    start_s: float
    end_s: float
    label: str = ""

    def __post_init__(self):
        if not (self.end_s > self.start_s):
            raise ValidationError(f"window end {self.end_s} must exceed start {self.start_s}")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    def contains(self, t: float) -> bool:
        return self.start_s <= t < self.end_s


def slice_window(series: TimeSeries, w: Window) -> TimeSeries:
    """Samples of `series` whose timestamps fall in [w.start_s, w.end_s).

    Raises
    ------
    ValidationError
        If the window does not intersect the series.
    """
    r = series.sampling_rate_hz
    i0 = math.ceil((w.start_s - series.start_s) * r - TIME_EPS)
    i1 = math.ceil((w.end_s - series.start_s) * r - TIME_EPS)
    i0 = max(i0, 0)
    i1 = min(i1, series.n_samples)
    if i0 >= i1:
        raise ValidationError(
            f"window [{w.start_s}, {w.end_s}) does not intersect "
            f"{series.channel_kind} series [{series.start_s}, {series.end_s})"
        )
    return TimeSeries(
        channel_kind=series.channel_kind,
        sampling_rate_hz=r,
        start_s=series.start_s + i0 / r,
        values=series.values[i0:i1],
    )


@dataclass(frozen=True)
class Scenario:
    id: str
    kind: str
    start_s: float
    end_s: float

    def window(self) -> Window:
        return Window(self.start_s, self.end_s, label=self.id)


@dataclass(frozen=True)
class LevelInterval:
    scenario_id: str
    level: int
    start_s: float
    end_s: float

    def window(self) -> Window:
        return Window(self.start_s, self.end_s, label=f"{self.scenario_id}/level-{self.level}")


@dataclass(frozen=True)
class SessionMarkers:
    """Scenario boundaries plus difficulty-level intervals for the tests.

    Invariants enforced at construction: scenarios are ordered,
    non-overlapping and contiguous from t=0; every test scenario carries
    exactly :data:`LEVELS_PER_TEST` level intervals that partition it.
    """

    scenarios: tuple[Scenario, ...]
    levels: tuple[LevelInterval, ...]

    def __post_init__(self):
        scenarios = tuple(self.scenarios)
        levels = tuple(self.levels)
        object.__setattr__(self, "scenarios", scenarios)
        object.__setattr__(self, "levels", levels)
        if not scenarios:
            raise ValidationError("markers need at least one scenario")
        t = 0.0
        ids = set()
        for sc in scenarios:
            if sc.kind not in SCENARIO_KINDS:
                raise ValidationError(f"scenario {sc.id}: unknown kind {sc.kind!r}")
            if sc.id in ids:
                raise ValidationError(f"duplicate scenario id {sc.id!r}")
            ids.add(sc.id)
            if abs(sc.start_s - t) > 1e-6:
                raise ValidationError(
                    f"scenario {sc.id} starts at {sc.start_s}, expected contiguous {t}"
                )
            if not (sc.end_s > sc.start_s):
                raise ValidationError(f"scenario {sc.id} has non-positive duration")
            t = sc.end_s
        for iv in levels:
            if iv.scenario_id not in ids:
                raise ValidationError(f"level interval references unknown scenario {iv.scenario_id!r}")
        for sc in scenarios:
            ivs = sorted(
                (iv for iv in levels if iv.scenario_id == sc.id), key=lambda iv: iv.level
            )
            if sc.kind == "relax":
                if ivs:
                    raise ValidationError(f"relax scenario {sc.id} must not carry levels")
                continue
            if [iv.level for iv in ivs] != list(range(1, LEVELS_PER_TEST + 1)):
                raise ValidationError(
                    f"test scenario {sc.id} needs levels 1..{LEVELS_PER_TEST}, "
                    f"got {[iv.level for iv in ivs]}"
                )
            edge = sc.start_s
            for iv in ivs:
                if abs(iv.start_s - edge) > 1e-6 or not (iv.end_s > iv.start_s):
                    raise ValidationError(
                        f"levels of scenario {sc.id} do not partition it (level {iv.level})"
                    )
                edge = iv.end_s
            if abs(edge - sc.end_s) > 1e-6:
                raise ValidationError(f"levels of scenario {sc.id} stop at {edge}, not {sc.end_s}")

    @property
    def session_end_s(self) -> float:
        return self.scenarios[-1].end_s

    def scenario(self, scenario_id: str) -> Scenario:
        for sc in self.scenarios:
            if sc.id == scenario_id:
                return sc
        raise ValidationError(f"no scenario {scenario_id!r}")

    def scenario_of_kind(self, kind: str) -> Scenario:
        """The unique scenario of `kind`; errors if absent or ambiguous."""
        hits = [sc for sc in self.scenarios if sc.kind == kind]
        if len(hits) != 1:
            raise ValidationError(f"expected exactly one {kind!r} scenario, found {len(hits)}")
        return hits[0]

    def levels_for(self, scenario_id: str) -> tuple[LevelInterval, ...]:
        return tuple(
            sorted((iv for iv in self.levels if iv.scenario_id == scenario_id),
                   key=lambda iv: iv.level)
        )


def default_markers() -> SessionMarkers:
    """Canonical timeline: scenarios I-V from t=0, levels as equal sevenths.

    Per-level slide counts are equal (15 or 7 per level), so the canonical
    level intervals split each test scenario into seven equal parts.
    """
    scenarios = []
    levels = []
    t = 0.0
    for sid, kind, dur in SCENARIO_PLAN:
        scenarios.append(Scenario(sid, kind, t, t + dur))
        if kind in ("stroop", "math"):
            for lv in range(1, LEVELS_PER_TEST + 1):
                levels.append(
                    LevelInterval(sid, lv, t + dur * (lv - 1) / LEVELS_PER_TEST,
                                  t + dur * lv / LEVELS_PER_TEST)
                )
        t += dur
    return SessionMarkers(tuple(scenarios), tuple(levels))


def save_markers(markers: SessionMarkers, path: str | Path) -> None:
    doc = {
        "scenarios": [
            {"id": sc.id, "kind": sc.kind, "start_s": sc.start_s, "end_s": sc.end_s}
            for sc in markers.scenarios
        ],
        "levels": [
            {"scenario_id": iv.scenario_id, "level": iv.level,
             "start_s": iv.start_s, "end_s": iv.end_s}
            for iv in markers.levels
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_markers(path: str | Path) -> SessionMarkers:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    try:
        scenarios = tuple(
            Scenario(str(d["id"]), str(d["kind"]), float(d["start_s"]), float(d["end_s"]))
            for d in doc["scenarios"]
        )
        levels = tuple(
            LevelInterval(str(d["scenario_id"]), int(d["level"]),
                          float(d["start_s"]), float(d["end_s"]))
            for d in doc.get("levels", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed markers document ({exc})") from exc
    return SessionMarkers(scenarios, levels)


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    channel_kind: str
    sampling_rate_hz: float
    units: str


@dataclass(frozen=True)
class ChannelManifest:
    """Subject's recording manifest: one entry per channel file.

    `base_dir` is where relative entry paths resolve (the manifest's own
    directory when loaded from disk).
    """

    subject_id: str
    entries: tuple[ManifestEntry, ...]
    base_dir: Path = Path(".")

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "base_dir", Path(self.base_dir))
        if not self.subject_id:
            raise ValidationError("manifest needs a non-empty subject_id")
        kinds = [e.channel_kind for e in self.entries]
        if len(set(kinds)) != len(kinds):
            raise ValidationError(f"duplicate channel kinds in manifest: {kinds}")
        for e in self.entries:
            if e.channel_kind not in CHANNEL_KINDS:
                raise ValidationError(f"unknown channel kind {e.channel_kind!r}")
            if not (e.sampling_rate_hz > 0):
                raise ValidationError(f"{e.channel_kind}: sampling rate must be > 0")

    def entry(self, kind: str) -> ManifestEntry | None:
        for e in self.entries:
            if e.channel_kind == kind:
                return e
        return None

    def resolve(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        return p if p.is_absolute() else self.base_dir / p


def save_manifest(manifest: ChannelManifest, path: str | Path) -> None:
    doc = {
        "subject_id": manifest.subject_id,
        "entries": [
            {"path": e.path, "channel_kind": e.channel_kind,
             "sampling_rate_hz": e.sampling_rate_hz, "units": e.units}
            for e in manifest.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_manifest(path: str | Path) -> ChannelManifest:
    """Parse and validate a manifest; every referenced file must exist."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError(f"manifest not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    try:
        entries = tuple(
            ManifestEntry(str(d["path"]), str(d["channel_kind"]),
                          float(d["sampling_rate_hz"]), str(d["units"]))
            for d in doc["entries"]
        )
        manifest = ChannelManifest(str(doc["subject_id"]), entries, base_dir=path.parent)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed manifest ({exc})") from exc
    for e in manifest.entries:
        f = manifest.resolve(e)
        if not f.is_file():
            raise ValidationError(f"{path}: missing channel file {f}")
    return manifest


def load_series(entry: ManifestEntry, base_dir: str | Path = ".") -> TimeSeries:
    """Load one channel file and validate it against its manifest entry.

    Checks: header, parseable finite floats, strictly increasing
    timestamps, and implied rate within 0.1% of the declared rate.
    """
    p = Path(entry.path)
    if not p.is_absolute():
        p = Path(base_dir) / p
    try:
        raw = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValidationError(f"missing channel file {p}")
    lines = raw.splitlines()
    if not lines or lines[0].strip() != SERIES_HEADER:
        raise ValidationError(f"{p}: expected header {SERIES_HEADER!r}")
    n = len(lines) - 1
    if n < 2:
        raise ValidationError(f"{p}: need at least 2 samples")
    t = np.empty(n)
    v = np.empty(n)
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != 2:
            raise ValidationError(f"{p}: line {i + 2}: expected 't,value', got {line!r}")
        try:
            t[i] = float(parts[0])
            v[i] = float(parts[1])
        except ValueError:
            raise ValidationError(f"{p}: line {i + 2}: unparseable sample {line!r}")
    if not np.all(np.isfinite(t)) or not np.all(np.isfinite(v)):
        raise ValidationError(f"{p}: non-finite samples")
    if np.any(np.diff(t) <= 0):
        raise ValidationError(f"{p}: timestamps not strictly increasing")
    implied = (n - 1) / (t[-1] - t[0])
    declared = entry.sampling_rate_hz
    if abs(implied - declared) / declared > 1e-3:
        raise ValidationError(
            f"{p}: implied rate {implied:.6g} Hz deviates from declared {declared:.6g} Hz"
        )
    return TimeSeries(entry.channel_kind, declared, float(t[0]), v)


def write_series(series: TimeSeries, path: str | Path) -> None:
    """Write a channel file in canonical formatting (round-trips bit-exactly)."""
    t = series.times()
    out = [SERIES_HEADER]
    out.extend(f"{_fmt(ti)},{_fmt(vi)}" for ti, vi in zip(t, series.values))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def load_channels(manifest: ChannelManifest) -> dict[str, TimeSeries]:
    """Load every channel referenced by the manifest, keyed by kind."""
    return {e.channel_kind: load_series(e, manifest.base_dir) for e in manifest.entries}
