/**
 * View models for the slide area.
 *
 * These are plain data the DOM layer draws verbatim.  Nothing here may
 * hint at the correct answer: the colour buttons always come in the
 * same canonical order with no per-button flags, and the arithmetic
 * prompt shows only the operands (the loader never even parsed the
 * expected result, see plan.ts).
 */

import { COLORS, ColorName, Slide } from "./plan.js";

export interface StroopView {
  kind: "stroop";
  /** The word to draw. */
  word: ColorName;
  /** CSS colour to draw it in. */
  inkColor: ColorName;
  /** Button labels, always the canonical seven in fixed order. */
  buttons: readonly ColorName[];
}

export interface MathView {
  kind: "math";
  /** e.g. "27 × 4 =" with a numeric entry field after it. */
  prompt: string;
  entry: string;
}

export interface RestView {
  kind: "rest";
}

export type SlideView = StroopView | MathView | RestView;

const OPERATOR_GLYPHS: Record<string, string> = {
  "+": "+",
  "-": "−",
  "*": "×",
  "/": "÷",
};

export function renderSlide(slide: Slide | null, entry = ""): SlideView {
  if (slide === null) {
    return { kind: "rest" };
  }
  if (slide.kind === "stroop") {
    return { kind: "stroop", word: slide.word, inkColor: slide.ink, buttons: COLORS };
  }
  const glyph = OPERATOR_GLYPHS[slide.operator];
  return {
    kind: "math",
    prompt: `${slide.operandA} ${glyph} ${slide.operandB} =`,
    entry,
  };
}
