/**
 * Session timekeeping.
 *
 * Everything in the runner is stamped on one monotonic millisecond
 * clock whose zero is the moment the operator starts the session.  The
 * wall-clock start time is captured once, next to the origin, and never
 * consulted again; log timestamps are offsets from the origin.
 */

export interface Clock {
  /** Monotonic milliseconds.  Never decreases between calls. */
  nowMs(): number;
}

/** Real clock for the browser: performance.now() is monotonic. */
export class SystemClock implements Clock {
  nowMs(): number {
    return performance.now();
  }
}

/**
 * Hand-driven clock for tests and headless runs.  `advance` moves time
 * forward; moving it backwards is a programming error.
 */
export class ManualClock implements Clock {
  private t: number;

  constructor(startMs = 0) {
    this.t = startMs;
  }

  nowMs(): number {
    return this.t;
  }

  advance(byMs: number): void {
    if (byMs < 0) {
      throw new Error(`clock cannot run backwards (advance by ${byMs} ms)`);
    }
    this.t += byMs;
  }
}
