/**
 * Operator-facing session controller.
 *
 * Owns plan loading and the engine lifecycle.  Start stays disabled
 * until both plans are loaded; starting captures the wall-clock time
 * once (for the record) and pins the monotonic origin, after which
 * every timestamp is an offset from that origin.
 */

import { Clock } from "./clock.js";
import { parsePlan, StimulusPlan } from "./plan.js";
import { PacerState } from "./pacer.js";
import { Slide } from "./plan.js";
import { SessionEngine } from "./session.js";

export interface OperatorStatus {
  running: boolean;
  aborted: boolean;
  complete: boolean;
  scenarioId: string | null;
  settledSlides: number;
  totalSlides: number;
}

export class SessionController {
  private stroop: StimulusPlan | null = null;
  private math: StimulusPlan | null = null;
  private engine: SessionEngine | null = null;
  private originMs = 0;
  private readonly clock: Clock;
  /** Wall-clock session start, captured once. */
  startedAtIso: string | null = null;

  constructor(clock: Clock) {
    this.clock = clock;
  }

  loadPlan(text: string): StimulusPlan {
    const plan = parsePlan(text);
    if (plan.kind === "stroop") {
      this.stroop = plan;
    } else {
      this.math = plan;
    }
    return plan;
  }

  get canStart(): boolean {
    return this.engine === null && this.stroop !== null && this.math !== null;
  }

  start(): void {
    if (!this.canStart) {
      throw new Error("cannot start: load one stroop and one math plan first");
    }
    this.originMs = this.clock.nowMs();
    this.startedAtIso = new Date().toISOString();
    this.engine = new SessionEngine(this.stroop!, this.math!);
  }

  private sessionNowMs(): number {
    return this.clock.nowMs() - this.originMs;
  }

  /** Drive one frame; call from the animation loop. */
  tick(): void {
    this.engine?.tick(this.sessionNowMs());
  }

  respond(value: string): boolean {
    if (this.engine === null) {
      return false;
    }
    return this.engine.respond(value, this.sessionNowMs());
  }

  abort(): void {
    this.engine?.abort();
  }

  activeSlide(): Slide | null {
    return this.engine?.activeSlide() ?? null;
  }

  pacer(): PacerState | null {
    return this.engine?.pacerState(this.sessionNowMs()) ?? null;
  }

  status(): OperatorStatus {
    if (this.engine === null) {
      return {
        running: false,
        aborted: false,
        complete: false,
        scenarioId: null,
        settledSlides: 0,
        totalSlides: 0,
      };
    }
    const p = this.engine.progress();
    return {
      running: this.engine.phase === "running",
      aborted: this.engine.isAborted,
      complete: this.engine.isComplete,
      scenarioId: this.engine.scenarioAt(this.sessionNowMs())?.id ?? null,
      settledSlides: p.settled,
      totalSlides: p.total,
    };
  }

  session(): SessionEngine {
    if (this.engine === null) {
      throw new Error("session has not started");
    }
    return this.engine;
  }
}
