/**
 * Breathing pacer for the relax scenarios.
 *
 * One cycle is 4 s of inhale followed by 6 s of exhale (0.1 Hz).  The
 * cue runs only while a relax scenario is on screen and restarts from
 * an inhale at each relax onset, so a 4-minute relax block paces 24
 * full cycles.  During the tests the pacer is dark.
 */

export const INHALE_S = 4.0;
export const EXHALE_S = 6.0;
export const CYCLE_S = INHALE_S + EXHALE_S;

export type BreathPhase = "inhale" | "exhale";

export interface PacerState {
  /** Completed cycles since the relax block began. */
  cycle: number;
  phase: BreathPhase;
  /** Progress through the current phase, 0..1, for animation. */
  phaseFraction: number;
}

/** Pacer state at `elapsedS` seconds into a relax scenario. */
export function pacerAt(elapsedS: number): PacerState {
  if (elapsedS < 0) {
    throw new Error(`pacer time must be >= 0, got ${elapsedS}`);
  }
  const cycle = Math.floor(elapsedS / CYCLE_S);
  const into = elapsedS - cycle * CYCLE_S;
  if (into < INHALE_S) {
    return { cycle, phase: "inhale", phaseFraction: into / INHALE_S };
  }
  return { cycle, phase: "exhale", phaseFraction: (into - INHALE_S) / EXHALE_S };
}

/** Full cycles a relax block of the given length paces. */
export function cyclesInBlock(durationS: number): number {
  return Math.floor(durationS / CYCLE_S);
}
