/**
 * The fixed session timeline and the artefacts derived from it.
 *
 * A session is five scenarios run back to back: relax, colour-word
 * test, relax, arithmetic test, relax.  Each test scenario is a train
 * of fixed slide slots; slide k occupies exactly its deadline, so the
 * slots tile the scenario and the last one ends on the boundary.
 */

import { LEVELS_PER_TEST, Slide, StimulusPlan } from "./plan.js";

export type ScenarioKind = "relax" | "stroop" | "math";

export interface ScenarioSpec {
  id: string;
  kind: ScenarioKind;
  startS: number;
  endS: number;
}

export const SCENARIO_PLAN: ReadonlyArray<readonly [string, ScenarioKind, number]> = [
  ["I", "relax", 240.0],
  ["II", "stroop", 240.0],
  ["III", "relax", 240.0],
  ["IV", "math", 300.0],
  ["V", "relax", 180.0],
];

export function scenarioSpecs(): ScenarioSpec[] {
  const out: ScenarioSpec[] = [];
  let t = 0.0;
  for (const [id, kind, dur] of SCENARIO_PLAN) {
    out.push({ id, kind, startS: t, endS: t + dur });
    t += dur;
  }
  return out;
}

export const SESSION_END_S = scenarioSpecs()[SCENARIO_PLAN.length - 1].endS;

/** One slide bound to its slot on the session timeline. */
export interface SlideSlot {
  slide: Slide;
  scenarioId: string;
  startMs: number;
  endMs: number;
}

/**
 * Lay the plans' slides out as contiguous slots inside their scenarios.
 * Slide order is plan file order; slot length is the slide's deadline.
 * The deadline budget equals the scenario duration (the plan loader
 * checked this within 1%), so the train fits.
 */
export function buildSchedule(stroop: StimulusPlan, math: StimulusPlan): SlideSlot[] {
  const slots: SlideSlot[] = [];
  for (const sc of scenarioSpecs()) {
    const plan = sc.kind === "stroop" ? stroop : sc.kind === "math" ? math : null;
    if (plan === null) {
      continue;
    }
    let t = sc.startS * 1000.0;
    for (const slide of plan.slides) {
      slots.push({
        slide,
        scenarioId: sc.id,
        startMs: t,
        endMs: t + slide.deadlineS * 1000.0,
      });
      t += slide.deadlineS * 1000.0;
    }
  }
  return slots;
}

export interface LevelInterval {
  scenarioId: string;
  level: number;
  startS: number;
  endS: number;
}

export interface SessionMarkers {
  scenarios: ScenarioSpec[];
  levels: LevelInterval[];
}

/**
 * Difficulty-level intervals for one test scenario, sized by each
 * level's share of the deadline budget.  The last edge is pinned to the
 * scenario end so the intervals partition it exactly even when the
 * budget carries float round-off.
 */
export function levelIntervals(plan: StimulusPlan, sc: ScenarioSpec): LevelInterval[] {
  const budgets: number[] = [];
  for (let lv = 1; lv <= LEVELS_PER_TEST; lv++) {
    budgets.push(
      plan.slides.filter((s) => s.level === lv).reduce((acc, s) => acc + s.deadlineS, 0),
    );
  }
  const total = budgets.reduce((a, b) => a + b, 0);
  const dur = sc.endS - sc.startS;
  const scale = dur / total;
  const out: LevelInterval[] = [];
  let edge = sc.startS;
  let cum = 0.0;
  for (let lv = 1; lv <= LEVELS_PER_TEST; lv++) {
    cum += budgets[lv - 1];
    const next = lv === LEVELS_PER_TEST ? sc.endS : sc.startS + cum * scale;
    out.push({ scenarioId: sc.id, level: lv, startS: edge, endS: next });
    edge = next;
  }
  return out;
}

/** Full markers document for a completed run. */
export function buildMarkers(stroop: StimulusPlan, math: StimulusPlan): SessionMarkers {
  const scenarios = scenarioSpecs();
  const levels: LevelInterval[] = [];
  for (const sc of scenarios) {
    if (sc.kind === "stroop") {
      levels.push(...levelIntervals(stroop, sc));
    } else if (sc.kind === "math") {
      levels.push(...levelIntervals(math, sc));
    }
  }
  return { scenarios, levels };
}
