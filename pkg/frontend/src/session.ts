/**
 * Session state machine.
 *
 * The engine is deliberately clock-free: every entry point takes the
 * current monotonic time in session milliseconds (zero = session
 * start), so the same machine serves the browser's animation-frame loop
 * and the accelerated headless driver.  Each tick settles any slot
 * whose deadline has passed (a missed response is data, not an error)
 * and presents the slide whose slot has opened.  Responses land between
 * ticks and are stamped with the time they were handled, so their
 * effective granularity is one frame of the driving loop.
 */

import { Slide, StimulusPlan } from "./plan.js";
import { pacerAt, PacerState } from "./pacer.js";
import {
  buildMarkers,
  buildSchedule,
  levelIntervals,
  ScenarioSpec,
  scenarioSpecs,
  SessionMarkers,
  SlideSlot,
} from "./protocol.js";

/** One log line: a presented slide and what came back, if anything. */
export interface LogRecord {
  slideIndex: number;
  presentedAtMs: number;
  response: string | null;
  respondedAtMs: number | null;
}

export type EnginePhase = "running" | "aborted" | "complete";

export class SessionEngine {
  readonly slots: SlideSlot[];
  private readonly scenarios: ScenarioSpec[];
  private readonly stroop: StimulusPlan;
  private readonly math: StimulusPlan;

  private records: LogRecord[] = [];
  private cursor = 0;
  private open = false;
  private lastTickMs = 0;
  private crossed = 0;
  private _phase: EnginePhase = "running";

  constructor(stroop: StimulusPlan, math: StimulusPlan) {
    if (stroop.kind !== "stroop" || math.kind !== "math") {
      throw new Error(`plans passed in the wrong order: ${stroop.kind}, ${math.kind}`);
    }
    this.stroop = stroop;
    this.math = math;
    this.slots = buildSchedule(stroop, math);
    this.scenarios = scenarioSpecs();
  }

  get phase(): EnginePhase {
    return this._phase;
  }

  get sessionEndMs(): number {
    return this.scenarios[this.scenarios.length - 1].endS * 1000.0;
  }

  /** Advance to `nowMs`.  The clock must not run backwards. */
  tick(nowMs: number): void {
    if (nowMs < this.lastTickMs) {
      throw new Error(`clock went backwards: ${nowMs} < ${this.lastTickMs}`);
    }
    this.lastTickMs = nowMs;
    if (this._phase !== "running") {
      return;
    }
    while (this.crossed < this.scenarios.length && nowMs >= this.scenarios[this.crossed].endS * 1000.0) {
      this.crossed += 1;
    }
    while (this.cursor < this.slots.length) {
      const slot = this.slots[this.cursor];
      if (this.open) {
        if (nowMs < slot.endMs) {
          break;
        }
        // Deadline expired; the record stays as-is (missed if no
        // response arrived) and the train moves on.
        this.open = false;
        this.cursor += 1;
        continue;
      }
      if (nowMs >= slot.endMs) {
        // The whole slot passed between ticks; the slide was never on
        // screen, so it leaves no record and scores as unanswered.
        this.cursor += 1;
        continue;
      }
      if (nowMs >= slot.startMs) {
        const presented = Math.round(nowMs);
        const last = this.records[this.records.length - 1];
        if (last !== undefined && presented <= last.presentedAtMs) {
          throw new Error(`presentation times must strictly increase (${presented})`);
        }
        this.records.push({
          slideIndex: slot.slide.index,
          presentedAtMs: presented,
          response: null,
          respondedAtMs: null,
        });
        this.open = true;
      }
      break;
    }
    if (this.cursor >= this.slots.length && this.crossed >= this.scenarios.length) {
      this._phase = "complete";
    }
  }

  /** The slide currently on screen, or null between slides. */
  activeSlide(): Slide | null {
    if (this._phase !== "running" || !this.open) {
      return null;
    }
    return this.slots[this.cursor].slide;
  }

  /**
   * Record the subject's response to the slide on screen.  Returns
   * false when there is nothing to respond to or the slide already has
   * a response; only the first response per slide counts.
   */
  respond(value: string, nowMs: number): boolean {
    if (nowMs < this.lastTickMs) {
      throw new Error(`clock went backwards: ${nowMs} < ${this.lastTickMs}`);
    }
    if (this._phase !== "running" || !this.open) {
      return false;
    }
    const rec = this.records[this.records.length - 1];
    if (rec.response !== null) {
      return false;
    }
    rec.response = value;
    rec.respondedAtMs = Math.round(nowMs);
    return true;
  }

  /** Operator abort: freezes the log where it stands. */
  abort(): void {
    if (this._phase === "running") {
      this._phase = "aborted";
    }
  }

  get isComplete(): boolean {
    return this._phase === "complete";
  }

  get isAborted(): boolean {
    return this._phase === "aborted";
  }

  /** The log so far (complete sessions have one record per slide shown). */
  log(): LogRecord[] {
    return this.records.slice();
  }

  /** Scenario containing `nowMs`, or null past the session end. */
  scenarioAt(nowMs: number): ScenarioSpec | null {
    const s = nowMs / 1000.0;
    for (const sc of this.scenarios) {
      if (s >= sc.startS && s < sc.endS) {
        return sc;
      }
    }
    return null;
  }

  /**
   * Breathing cue state, or null whenever no relax scenario is on
   * screen (during the tests the pacer is dark).
   */
  pacerState(nowMs: number): PacerState | null {
    if (this._phase !== "running") {
      return null;
    }
    const sc = this.scenarioAt(nowMs);
    if (sc === null || sc.kind !== "relax") {
      return null;
    }
    return pacerAt(nowMs / 1000.0 - sc.startS);
  }

  /**
   * Boundary markers recorded so far: every scenario whose end the
   * clock has crossed, with level intervals for the finished tests.  A
   * completed run yields the full five-scenario document; an aborted
   * one retains the boundaries it reached.
   */
  markersSoFar(): SessionMarkers {
    if (this._phase === "complete") {
      return buildMarkers(this.stroop, this.math);
    }
    const scenarios = this.scenarios.slice(0, this.crossed);
    const levels = scenarios.flatMap((sc) =>
      sc.kind === "stroop"
        ? levelIntervals(this.stroop, sc)
        : sc.kind === "math"
          ? levelIntervals(this.math, sc)
          : [],
    );
    return { scenarios, levels };
  }

  /** Operator-view progress: slides settled out of slides scheduled. */
  progress(): { settled: number; total: number } {
    return { settled: this.cursor, total: this.slots.length };
  }
}
