import { describe, expect, it } from "vitest";

import { parsePlan } from "../src/plan.js";

function tinyStroopDoc(): Record<string, unknown> {
  const slides = [];
  for (let lv = 1; lv <= 7; lv++) {
    slides.push({
      index: lv - 1,
      level: lv,
      kind: "stroop",
      deadline_s: 10.0,
      expected: "red",
      word: "blue",
      ink: "red",
    });
  }
  return { kind: "stroop", seed: 3, target_duration_s: 70.0, slides };
}

describe("plan loading", () => {
  it("parses a stroop plan and maps the slide fields", () => {
    const plan = parsePlan(JSON.stringify(tinyStroopDoc()));
    expect(plan.kind).toBe("stroop");
    expect(plan.slides).toHaveLength(7);
    const s = plan.slides[0];
    expect(s).toMatchObject({ index: 0, level: 1, deadlineS: 10.0 });
    if (s.kind !== "stroop") {
      throw new Error("expected a stroop slide");
    }
    expect(s.word).toBe("blue");
    expect(s.ink).toBe("red");
  });

  it("drops the answer key on the floor", () => {
    // The plan file carries the expected answer for offline scoring;
    // the runner must not even hold it in memory.
    const plan = parsePlan(JSON.stringify(tinyStroopDoc()));
    for (const s of plan.slides) {
      expect("expected" in s).toBe(false);
    }
    expect(JSON.stringify(plan)).not.toContain("expected");
  });

  it("parses math slides with their operands", () => {
    const slides = [];
    for (let lv = 1; lv <= 7; lv++) {
      slides.push({
        index: 1000 + lv - 1,
        level: lv,
        kind: "math",
        deadline_s: 5.0,
        expected: "41",
        operand_a: 37,
        operand_b: 4,
        operator: "+",
      });
    }
    const plan = parsePlan(
      JSON.stringify({ kind: "math", seed: 1, target_duration_s: 35.0, slides }),
    );
    const s = plan.slides[3];
    if (s.kind !== "math") {
      throw new Error("expected a math slide");
    }
    expect(s.operandA).toBe(37);
    expect(s.operandB).toBe(4);
    expect(s.operator).toBe("+");
  });

  it("rejects a deadline budget off by more than 1%", () => {
    const doc = tinyStroopDoc();
    doc.target_duration_s = 80.0;
    expect(() => parsePlan(JSON.stringify(doc))).toThrow(/deadlines sum/);
  });

  it("rejects a plan with a missing level", () => {
    const doc = tinyStroopDoc();
    const slides = doc.slides as Array<Record<string, unknown>>;
    slides[6].level = 6; // level 7 gone, budget unchanged
    expect(() => parsePlan(JSON.stringify(doc))).toThrow(/missing level 7/);
  });

  it("rejects duplicate slide indices", () => {
    const doc = tinyStroopDoc();
    (doc.slides as Array<Record<string, unknown>>)[3].index = 0;
    expect(() => parsePlan(JSON.stringify(doc))).toThrow(/duplicate slide index/);
  });

  it("rejects slides out of level order", () => {
    const doc = tinyStroopDoc();
    const slides = doc.slides as Array<Record<string, unknown>>;
    [slides[0].level, slides[6].level] = [slides[6].level, slides[0].level];
    expect(() => parsePlan(JSON.stringify(doc))).toThrow(/ascending level/);
  });

  it("rejects unknown colours and operators", () => {
    const doc = tinyStroopDoc();
    (doc.slides as Array<Record<string, unknown>>)[0].ink = "mauve";
    expect(() => parsePlan(JSON.stringify(doc))).toThrow(/colour/);

    const mdoc = tinyStroopDoc();
    (mdoc.slides as Array<Record<string, unknown>>)[0] = {
      index: 0,
      level: 1,
      kind: "math",
      deadline_s: 10.0,
      operand_a: 2,
      operand_b: 2,
      operator: "%",
    };
    expect(() => parsePlan(JSON.stringify(mdoc))).toThrow(/operator/);
  });

  it("rejects non-JSON and empty plans", () => {
    expect(() => parsePlan("not json")).toThrow(/JSON/);
    expect(() =>
      parsePlan(JSON.stringify({ kind: "stroop", seed: 0, target_duration_s: 1, slides: [] })),
    ).toThrow(/no slides/);
  });
});
