/**
 * Scripted subject for headless runs.
 *
 * The script fixes how many slides per difficulty level get a correct
 * answer; the rest are split between a deliberate wrong answer and no
 * answer at all, which is how real lapses show up.  Correct answers are
 * derived from the stimulus itself (ink colour, or the arithmetic
 * result), never read from the plan file.
 */

import { COLORS, Slide } from "./plan.js";
import { SessionEngine } from "./session.js";

export interface ResponderScript {
  /** Correct answers to give per level (index 0 = level 1). */
  stroopCorrect: number[];
  mathCorrect: number[];
  seed: number;
}

/** Deterministic 32-bit PRNG (mulberry32), good enough for latencies. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function correctAnswer(slide: Slide): string {
  if (slide.kind === "stroop") {
    return slide.ink;
  }
  const { operandA: a, operandB: b } = slide;
  switch (slide.operator) {
    case "+":
      return String(a + b);
    case "-":
      return String(a - b);
    case "*":
      return String(a * b);
    case "/":
      return String(a / b);
  }
}

function wrongAnswer(slide: Slide): string {
  if (slide.kind === "stroop") {
    const i = COLORS.indexOf(slide.ink);
    return COLORS[(i + 1) % COLORS.length];
  }
  return String(Number(correctAnswer(slide)) + 1);
}

type PlannedAction = { kind: "answer"; value: string; latencyMs: number } | { kind: "silent" };

export class ScriptedResponder {
  private readonly script: ResponderScript;
  private readonly rand: () => number;
  private seenPerLevel = new Map<string, number>();
  private planned: PlannedAction | null = null;
  private plannedFor: number | null = null;
  private answered = false;
  private wrongToggle = false;

  constructor(script: ResponderScript) {
    if (script.stroopCorrect.length !== 7 || script.mathCorrect.length !== 7) {
      throw new Error("scripts need one correct-count per level (7 each)");
    }
    this.script = script;
    this.rand = mulberry32(script.seed);
  }

  private decide(slide: Slide): PlannedAction {
    const key = `${slide.kind}:${slide.level}`;
    const seen = this.seenPerLevel.get(key) ?? 0;
    this.seenPerLevel.set(key, seen + 1);
    const quota =
      slide.kind === "stroop"
        ? this.script.stroopCorrect[slide.level - 1]
        : this.script.mathCorrect[slide.level - 1];
    const latencyMs = (0.25 + 0.5 * this.rand()) * slide.deadlineS * 1000.0;
    if (seen < quota) {
      return { kind: "answer", value: correctAnswer(slide), latencyMs };
    }
    this.wrongToggle = !this.wrongToggle;
    if (this.wrongToggle) {
      return { kind: "answer", value: wrongAnswer(slide), latencyMs };
    }
    return { kind: "silent" };
  }

  /** Called once per frame, after the engine tick. */
  onTick(engine: SessionEngine, nowMs: number): void {
    const slide = engine.activeSlide();
    if (slide === null) {
      this.planned = null;
      this.plannedFor = null;
      return;
    }
    if (this.plannedFor !== slide.index) {
      this.planned = this.decide(slide);
      this.plannedFor = slide.index;
      this.answered = false;
    }
    if (this.answered || this.planned === null || this.planned.kind === "silent") {
      return;
    }
    const rec = engine.log();
    const presented = rec[rec.length - 1].presentedAtMs;
    if (nowMs >= presented + this.planned.latencyMs) {
      engine.respond(this.planned.value, nowMs);
      this.answered = true;
    }
  }
}
