/**
 * Stimulus plan loading.
 *
 * Plans arrive as JSON files written by the analysis toolkit.  The
 * runner only needs what it takes to present each slide: level, deadline
 * and the stimulus itself.  The plan files also carry the expected
 * answer for offline scoring; this loader drops that field on purpose,
 * so nothing in the runner's data path can leak it into the view.
 */

export const COLORS = [
  "yellow",
  "red",
  "green",
  "blue",
  "black",
  "white",
  "orange",
] as const;

export type ColorName = (typeof COLORS)[number];

export const LEVELS_PER_TEST = 7;

export type PlanKind = "stroop" | "math";

export interface StroopSlide {
  index: number;
  level: number;
  kind: "stroop";
  deadlineS: number;
  word: ColorName;
  ink: ColorName;
}

export interface MathSlide {
  index: number;
  level: number;
  kind: "math";
  deadlineS: number;
  operandA: number;
  operandB: number;
  operator: "+" | "-" | "*" | "/";
}

export type Slide = StroopSlide | MathSlide;

export interface StimulusPlan {
  kind: PlanKind;
  seed: number;
  targetDurationS: number;
  slides: Slide[];
}

export class PlanError extends Error {}

function asNumber(v: unknown, what: string): number {
  if (typeof v !== "number" || !Number.isFinite(v)) {
    throw new PlanError(`${what} is not a finite number`);
  }
  return v;
}

function asColor(v: unknown, what: string): ColorName {
  if (typeof v !== "string" || !(COLORS as readonly string[]).includes(v)) {
    throw new PlanError(`${what} is not a known colour name: ${String(v)}`);
  }
  return v as ColorName;
}

function parseSlide(raw: unknown): Slide {
  if (typeof raw !== "object" || raw === null) {
    throw new PlanError("slide entry is not an object");
  }
  const d = raw as Record<string, unknown>;
  const index = asNumber(d.index, "slide index");
  const level = asNumber(d.level, "slide level");
  const deadlineS = asNumber(d.deadline_s, "slide deadline_s");
  if (deadlineS <= 0) {
    throw new PlanError(`slide ${index}: deadline must be positive`);
  }
  if (d.kind === "stroop") {
    return {
      index,
      level,
      kind: "stroop",
      deadlineS,
      word: asColor(d.word, `slide ${index} word`),
      ink: asColor(d.ink, `slide ${index} ink`),
    };
  }
  if (d.kind === "math") {
    const operator = d.operator;
    if (operator !== "+" && operator !== "-" && operator !== "*" && operator !== "/") {
      throw new PlanError(`slide ${index}: unknown operator ${String(operator)}`);
    }
    return {
      index,
      level,
      kind: "math",
      deadlineS,
      operandA: asNumber(d.operand_a, `slide ${index} operand_a`),
      operandB: asNumber(d.operand_b, `slide ${index} operand_b`),
      operator,
    };
  }
  throw new PlanError(`slide ${index}: unknown kind ${String(d.kind)}`);
}

/**
 * Parse one plan file.  Validates the invariants the runner relies on:
 * the deadline budget matches the scenario duration within 1%, levels
 * 1..7 all appear, and slides arrive grouped by ascending level (the
 * presentation order the schedule is built from).
 */
export function parsePlan(text: string): StimulusPlan {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (exc) {
    throw new PlanError(`not valid JSON (${String(exc)})`);
  }
  if (typeof doc !== "object" || doc === null) {
    throw new PlanError("plan document is not an object");
  }
  const d = doc as Record<string, unknown>;
  if (d.kind !== "stroop" && d.kind !== "math") {
    throw new PlanError(`unknown plan kind ${String(d.kind)}`);
  }
  if (!Array.isArray(d.slides) || d.slides.length === 0) {
    throw new PlanError("plan has no slides");
  }
  const slides = d.slides.map(parseSlide);
  const kind = d.kind;
  for (const s of slides) {
    if (s.kind !== kind) {
      throw new PlanError(`slide ${s.index} kind ${s.kind} inside a ${kind} plan`);
    }
  }
  const targetDurationS = asNumber(d.target_duration_s, "target_duration_s");
  const total = slides.reduce((acc, s) => acc + s.deadlineS, 0);
  if (Math.abs(total - targetDurationS) > 0.01 * targetDurationS) {
    throw new PlanError(
      `plan deadlines sum to ${total.toFixed(2)} s, expected ${targetDurationS} s within 1%`,
    );
  }
  const seen = new Set<number>();
  let lastLevel = 0;
  for (const s of slides) {
    if (seen.has(s.index)) {
      throw new PlanError(`duplicate slide index ${s.index}`);
    }
    seen.add(s.index);
    if (s.level < lastLevel) {
      throw new PlanError("slides are not ordered by ascending level");
    }
    lastLevel = s.level;
  }
  const levels = new Set(slides.map((s) => s.level));
  for (let lv = 1; lv <= LEVELS_PER_TEST; lv++) {
    if (!levels.has(lv)) {
      throw new PlanError(`plan is missing level ${lv}`);
    }
  }
  if (levels.size !== LEVELS_PER_TEST) {
    throw new PlanError(`plan levels must be 1..${LEVELS_PER_TEST}`);
  }
  return { kind, seed: asNumber(d.seed, "seed"), targetDurationS, slides };
}
