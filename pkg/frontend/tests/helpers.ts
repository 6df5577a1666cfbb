/** Synthetic plans for unit tests (real plan files come from the CLI). */

import { COLORS, MathSlide, StimulusPlan, StroopSlide } from "../src/plan.js";

export function syntheticStroopPlan(): StimulusPlan {
  const slides: StroopSlide[] = [];
  const deadlineS = 240.0 / 105;
  for (let lv = 1; lv <= 7; lv++) {
    for (let k = 0; k < 15; k++) {
      const i = (lv - 1) * 15 + k;
      slides.push({
        index: i,
        level: lv,
        kind: "stroop",
        deadlineS,
        word: COLORS[i % 7],
        ink: COLORS[(i + 3) % 7],
      });
    }
  }
  return { kind: "stroop", seed: 0, targetDurationS: 240.0, slides };
}

export function syntheticMathPlan(): StimulusPlan {
  const slides: MathSlide[] = [];
  const deadlineS = 300.0 / 49;
  for (let lv = 1; lv <= 7; lv++) {
    for (let k = 0; k < 7; k++) {
      const i = (lv - 1) * 7 + k;
      slides.push({
        index: 1000 + i,
        level: lv,
        kind: "math",
        deadlineS,
        operandA: 10 + i,
        operandB: 3,
        operator: "+",
      });
    }
  }
  return { kind: "math", seed: 0, targetDurationS: 300.0, slides };
}
