"""Stimulus plans for the two test blocks, session logs, and scoring.

A Stroop block shows 105 colour-word slides (15 per difficulty level);
difficulty rises by mixing in more incongruent slides and shrinking the
response deadline.  A mental-arithmetic block shows 49 slides (7 per
level) over the four basic operations with growing operand magnitude
and shrinking deadlines.  Per-level deadlines follow a linear ramp
rescaled so each block's deadline budget equals its scenario duration.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import LEVELS_PER_TEST, Scenario, Window
from .errors import ValidationError

COLORS = ("yellow", "red", "green", "blue", "black", "white", "orange")
OPERATORS = ("+", "-", "*", "/")

STROOP_SLIDES_PER_LEVEL = 15
MATH_SLIDES_PER_LEVEL = 7
STROOP_DURATION_S = 240.0
MATH_DURATION_S = 300.0

#: Math plans index their slides from here so one session log can carry
#: both tests without colliding slide indices.
MATH_INDEX_BASE = 1000


@dataclass(frozen=True)
class Slide:
    """One stimulus: either a colour word or an arithmetic task.

    Stroop slides use `word`/`ink`; math slides use `operand_a`,
    `operand_b`, `operator`.  `expected` is the correct response as the
    canonical answer string (ink colour name, or the integer result).
    """

    index: int
    level: int
    kind: str  # "stroop" | "math"
    deadline_s: float
    expected: str
    word: str | None = None
    ink: str | None = None
    operand_a: int | None = None
    operand_b: int | None = None
    operator: str | None = None

    @property
    def congruent(self) -> bool | None:
        if self.kind != "stroop":
            return None
        return self.word == self.ink


@dataclass(frozen=True)
class StimulusPlan:
    kind: str  # "stroop" | "math"
    seed: int
    slides: tuple[Slide, ...]
    target_duration_s: float

    def __post_init__(self):
        object.__setattr__(self, "slides", tuple(self.slides))
        if self.kind not in ("stroop", "math"):
            raise ValidationError(f"unknown plan kind {self.kind!r}")
        if not self.slides:
            raise ValidationError("plan has no slides")
        total = sum(s.deadline_s for s in self.slides)
        if abs(total - self.target_duration_s) > 0.01 * self.target_duration_s:
            raise ValidationError(
                f"plan deadlines sum to {total:.2f} s, expected "
                f"{self.target_duration_s:.0f} s within 1%"
            )
        levels = sorted({s.level for s in self.slides})
        if levels != list(range(1, LEVELS_PER_TEST + 1)):
            raise ValidationError(f"plan levels must be 1..{LEVELS_PER_TEST}, got {levels}")

    def slides_for_level(self, level: int) -> tuple[Slide, ...]:
        return tuple(s for s in self.slides if s.level == level)

    def slide_by_index(self, index: int) -> Slide | None:
        for s in self.slides:
            if s.index == index:
                return s
        return None

    @property
    def index_set(self) -> frozenset[int]:
        return frozenset(s.index for s in self.slides)


@dataclass(frozen=True)
class LogRecord:
    """One presented slide in a session log; None marks a missed response."""

    slide_index: int
    presented_at_ms: float
    response: str | None
    responded_at_ms: float | None


@dataclass(frozen=True)
class PerformanceRecord:
    """Per-level scoring outcome."""

    level: int
    n_correct: int
    n_total: int

    def __post_init__(self):
        if not (0 <= self.n_correct <= self.n_total) or self.n_total <= 0:
            raise ValidationError(
                f"bad performance record: {self.n_correct}/{self.n_total}"
            )

    @property
    def accuracy_pct(self) -> float:
        return 100.0 * self.n_correct / self.n_total


def _level_ramp(start: float, end: float) -> np.ndarray:
    return np.linspace(start, end, LEVELS_PER_TEST)


def level_deadlines(kind: str) -> np.ndarray:
    """Per-level response deadlines (seconds), level 1 first.

    A linear easy-to-hard ramp (3.2->1.6 s for colour naming, 9->4 s for
    arithmetic) rescaled so the total deadline budget equals the block's
    scenario duration exactly.
    """
    if kind == "stroop":
        ramp, per_level, total = _level_ramp(3.2, 1.6), STROOP_SLIDES_PER_LEVEL, STROOP_DURATION_S
    elif kind == "math":
        ramp, per_level, total = _level_ramp(9.0, 4.0), MATH_SLIDES_PER_LEVEL, MATH_DURATION_S
    else:
        raise ValidationError(f"unknown plan kind {kind!r}")
    return ramp * (total / (per_level * float(np.sum(ramp))))


def stroop_incongruent_counts() -> list[int]:
    """Incongruent slides per level: 0% at level 1 rising linearly to 100%."""
    counts = []
    for lv in range(1, LEVELS_PER_TEST + 1):
        frac = (lv - 1) / (LEVELS_PER_TEST - 1)
        counts.append(int(STROOP_SLIDES_PER_LEVEL * frac + 0.5))
    return counts


def generate_stroop_plan(seed: int) -> StimulusPlan:
    """105 colour-word slides, 15 per level, colours drawn uniformly.

    Ink colour is uniform over the palette on every slide; incongruent
    slides draw the word uniformly from the other colours.  Same seed,
    same plan.
    """
    rng = np.random.default_rng(seed)
    deadlines = level_deadlines("stroop")
    incong = stroop_incongruent_counts()
    slides = []
    index = 0
    for lv in range(1, LEVELS_PER_TEST + 1):
        n = STROOP_SLIDES_PER_LEVEL
        flags = np.zeros(n, dtype=bool)
        flags[:incong[lv - 1]] = True
        rng.shuffle(flags)
        for is_incong in flags:
            ink = COLORS[rng.integers(len(COLORS))]
            if is_incong:
                others = [c for c in COLORS if c != ink]
                word = others[rng.integers(len(others))]
            else:
                word = ink
            slides.append(Slide(
                index=index, level=lv, kind="stroop",
                deadline_s=float(deadlines[lv - 1]),
                expected=ink, word=word, ink=ink,
            ))
            index += 1
    return StimulusPlan("stroop", seed, tuple(slides), STROOP_DURATION_S)


def _digit_range(level: int) -> tuple[int, int]:
    # Operand magnitude grows with level: 1 digit at level 1 up to 3 digits.
    digits = 1 + int(round((level - 1) * 2 / (LEVELS_PER_TEST - 1)))
    if digits == 1:
        return 2, 9
    return 10 ** (digits - 1), 10 ** digits - 1


def generate_math_plan(seed: int, index_base: int = MATH_INDEX_BASE) -> StimulusPlan:
    """49 arithmetic slides, 7 per level, operators drawn uniformly.

    Division operands are constructed as divisor*quotient so results are
    always integers; subtraction operands are ordered to keep results
    non-negative.
    """
    rng = np.random.default_rng(seed)
    deadlines = level_deadlines("math")
    slides = []
    index = index_base
    for lv in range(1, LEVELS_PER_TEST + 1):
        lo, hi = _digit_range(lv)
        for _ in range(MATH_SLIDES_PER_LEVEL):
            op = OPERATORS[rng.integers(len(OPERATORS))]
            a = int(rng.integers(lo, hi + 1))
            b = int(rng.integers(lo, hi + 1))
            if op == "+":
                ans = a + b
            elif op == "-":
                if b > a:
                    a, b = b, a
                ans = a - b
            elif op == "*":
                ans = a * b
            else:
                quotient = a
                a = quotient * b
                ans = quotient
            slides.append(Slide(
                index=index, level=lv, kind="math",
                deadline_s=float(deadlines[lv - 1]),
                expected=str(ans), operand_a=a, operand_b=b, operator=op,
            ))
            index += 1
    return StimulusPlan("math", seed, tuple(slides), MATH_DURATION_S)


def save_plan(plan: StimulusPlan, path: str | Path) -> None:
    doc = {
        "kind": plan.kind,
        "seed": plan.seed,
        "target_duration_s": plan.target_duration_s,
        "slides": [],
    }
    for s in plan.slides:
        rec = {"index": s.index, "level": s.level, "kind": s.kind,
               "deadline_s": s.deadline_s, "expected": s.expected}
        if s.kind == "stroop":
            rec.update(word=s.word, ink=s.ink)
        else:
            rec.update(operand_a=s.operand_a, operand_b=s.operand_b, operator=s.operator)
        doc["slides"].append(rec)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_plan(path: str | Path) -> StimulusPlan:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError(f"plan not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    try:
        slides = tuple(
            Slide(
                index=int(d["index"]), level=int(d["level"]), kind=str(d["kind"]),
                deadline_s=float(d["deadline_s"]), expected=str(d["expected"]),
                word=d.get("word"), ink=d.get("ink"),
                operand_a=d.get("operand_a"), operand_b=d.get("operand_b"),
                operator=d.get("operator"),
            )
            for d in doc["slides"]
        )
        return StimulusPlan(str(doc["kind"]), int(doc["seed"]), slides,
                            float(doc["target_duration_s"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed plan ({exc})") from exc


def save_log(records: list[LogRecord], path: str | Path) -> None:
    """Write a session log as JSON Lines, one record per line."""
    lines = []
    for r in records:
        lines.append(json.dumps({
            "slide_index": r.slide_index,
            "presented_at_ms": r.presented_at_ms,
            "response": r.response,
            "responded_at_ms": r.responded_at_ms,
        }))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_log(path: str | Path) -> list[LogRecord]:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValidationError(f"session log not found: {path}")
    records = []
    for i, line in enumerate(raw.splitlines()):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            records.append(LogRecord(
                slide_index=int(d["slide_index"]),
                presented_at_ms=float(d["presented_at_ms"]),
                response=None if d["response"] is None else str(d["response"]),
                responded_at_ms=None if d["responded_at_ms"] is None
                else float(d["responded_at_ms"]),
            ))
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise ValidationError(f"{path}: line {i + 1}: bad log record ({exc})") from exc
    return records


def split_log(plans: list[StimulusPlan], records: list[LogRecord]) -> list[list[LogRecord]]:
    """Partition a session log across plans by slide-index membership."""
    out: list[list[LogRecord]] = [[] for _ in plans]
    sets = [p.index_set for p in plans]
    for r in records:
        for k, s in enumerate(sets):
            if r.slide_index in s:
                out[k].append(r)
                break
        else:
            raise ValidationError(f"log entry references unknown slide index {r.slide_index}")
    return out


def _response_correct(slide: Slide, rec: LogRecord) -> bool:
    if rec.response is None or rec.responded_at_ms is None:
        return False
    if rec.responded_at_ms - rec.presented_at_ms > slide.deadline_s * 1000.0:
        return False
    got = rec.response.strip().lower()
    if slide.kind == "math":
        try:
            return int(got) == int(slide.expected)
        except ValueError:
            return False
    return got == slide.expected


def score_session(plan: StimulusPlan, records: list[LogRecord]) -> list[PerformanceRecord]:
    """Score a log against its plan, one record per difficulty level.

    Missing and late responses count as incorrect; an entry whose slide
    index is not in the plan (or an empty log) is a plan mismatch.
    Scoring is order-independent: entries are keyed by slide index and
    only the earliest-presented entry per slide counts.
    """
    if not records:
        raise ValidationError(f"empty session log for {plan.kind} plan")
    by_index: dict[int, LogRecord] = {}
    for r in records:
        if r.slide_index not in plan.index_set:
            raise ValidationError(
                f"log entry references slide index {r.slide_index} not in the {plan.kind} plan"
            )
        prev = by_index.get(r.slide_index)
        if prev is None or r.presented_at_ms < prev.presented_at_ms:
            by_index[r.slide_index] = r
    out = []
    for lv in range(1, LEVELS_PER_TEST + 1):
        slides = plan.slides_for_level(lv)
        n_correct = 0
        for s in slides:
            rec = by_index.get(s.index)
            if rec is not None and _response_correct(s, rec):
                n_correct += 1
        out.append(PerformanceRecord(level=lv, n_correct=n_correct, n_total=len(slides)))
    return out


def partition_levels(plan: StimulusPlan, scenario: Scenario) -> list[Window]:
    """Level windows inside `scenario`, sized by each level's deadline budget.

    The scenario duration must match the plan's total deadline budget
    within 5%; boundaries are laid out proportionally so the windows
    partition the scenario exactly.
    """
    budgets = np.array([
        sum(s.deadline_s for s in plan.slides_for_level(lv))
        for lv in range(1, LEVELS_PER_TEST + 1)
    ])
    total = float(np.sum(budgets))
    dur = scenario.end_s - scenario.start_s
    if abs(total - dur) > 0.05 * dur:
        raise ValidationError(
            f"scenario {scenario.id} lasts {dur:.1f} s but the plan budget is {total:.1f} s"
        )
    edges = scenario.start_s + np.concatenate(([0.0], np.cumsum(budgets))) * (dur / total)
    edges[-1] = scenario.end_s
    return [
        Window(float(edges[i]), float(edges[i + 1]), label=f"{scenario.id}/level-{i + 1}")
        for i in range(LEVELS_PER_TEST)
    ]
