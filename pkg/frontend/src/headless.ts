/**
 * Headless driver: the full 20-minute protocol at simulation speed.
 *
 * The manual clock advances one frame per loop iteration with no real
 * waiting, so a whole session runs in well under a second while going
 * through exactly the same engine code the browser loop drives.
 */

import { ManualClock } from "./clock.js";
import { parsePlan, StimulusPlan } from "./plan.js";
import { SessionMarkers } from "./protocol.js";
import { ResponderScript, ScriptedResponder } from "./responder.js";
import { LogRecord, SessionEngine } from "./session.js";

export const FRAME_MS = 16;

export interface HeadlessOptions {
  script: ResponderScript;
  frameMs?: number;
  /** Abort the run once the clock passes this time, if set. */
  abortAtMs?: number;
}

export interface HeadlessResult {
  log: LogRecord[];
  markers: SessionMarkers;
  complete: boolean;
  aborted: boolean;
  frames: number;
  /** Breathing cycles begun per relax scenario id. */
  breathCycles: Record<string, number>;
}

export function runHeadless(
  stroop: StimulusPlan,
  math: StimulusPlan,
  opts: HeadlessOptions,
): HeadlessResult {
  const frameMs = opts.frameMs ?? FRAME_MS;
  if (frameMs <= 0) {
    throw new Error("frame length must be positive");
  }
  const clock = new ManualClock(0);
  const engine = new SessionEngine(stroop, math);
  const responder = new ScriptedResponder(opts.script);
  const breathCycles: Record<string, number> = {};
  let lastBreath: { scenario: string; cycle: number } | null = null;
  let frames = 0;

  while (engine.phase === "running") {
    const now = clock.nowMs();
    engine.tick(now);
    responder.onTick(engine, now);
    const pacer = engine.pacerState(now);
    if (pacer !== null) {
      const sc = engine.scenarioAt(now);
      if (sc !== null) {
        if (lastBreath === null || lastBreath.scenario !== sc.id || lastBreath.cycle !== pacer.cycle) {
          breathCycles[sc.id] = (breathCycles[sc.id] ?? 0) + 1;
          lastBreath = { scenario: sc.id, cycle: pacer.cycle };
        }
      }
    } else {
      lastBreath = null;
    }
    if (opts.abortAtMs !== undefined && now >= opts.abortAtMs) {
      engine.abort();
      break;
    }
    clock.advance(frameMs);
    frames += 1;
  }

  return {
    log: engine.log(),
    markers: engine.markersSoFar(),
    complete: engine.isComplete,
    aborted: engine.isAborted,
    frames,
    breathCycles,
  };
}

/** Convenience for tests: parse plan file text and run. */
export function runHeadlessFromText(
  stroopText: string,
  mathText: string,
  opts: HeadlessOptions,
): HeadlessResult {
  return runHeadless(parsePlan(stroopText), parsePlan(mathText), opts);
}
