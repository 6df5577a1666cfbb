/**
 * Browser entry point.  Static deployment: serve index.html next to the
 * compiled dist/ tree, no server-side parts.
 *
 * Wiring only; all behaviour lives in the testable modules.  One
 * requestAnimationFrame loop drives the engine, keyboard digits 1-7
 * press the colour buttons, and Enter submits the arithmetic entry.
 */

import { SystemClock } from "./clock.js";
import { SessionController } from "./controller.js";
import { manifestText, markersText, sessionLogText } from "./exporters.js";
import { COLORS } from "./plan.js";
import { renderSlide, SlideView } from "./render.js";

const controller = new SessionController(new SystemClock());

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const startBtn = el<HTMLButtonElement>("start");
const abortBtn = el<HTMLButtonElement>("abort");
const exportBtn = el<HTMLButtonElement>("export");
const planInput = el<HTMLInputElement>("plans");
const subjectInput = el<HTMLInputElement>("subject");
const stage = el<HTMLDivElement>("stage");
const statusLine = el<HTMLDivElement>("status");

let entry = "";

planInput.addEventListener("change", async () => {
  for (const file of Array.from(planInput.files ?? [])) {
    try {
      const plan = controller.loadPlan(await file.text());
      statusLine.textContent = `loaded ${plan.kind} plan (${plan.slides.length} slides)`;
    } catch (exc) {
      statusLine.textContent = `plan rejected: ${String(exc)}`;
    }
  }
  startBtn.disabled = !controller.canStart;
});

startBtn.disabled = true;
startBtn.addEventListener("click", () => {
  controller.start();
  startBtn.disabled = true;
  abortBtn.disabled = false;
});

abortBtn.addEventListener("click", () => {
  controller.abort();
});

function download(name: string, text: string): void {
  const a = document.createElement("a");
  a.href = URL.createObjectURL(new Blob([text], { type: "application/json" }));
  a.download = name;
  a.click();
  URL.revokeObjectURL(a.href);
}

exportBtn.addEventListener("click", () => {
  const engine = controller.session();
  download("session_log.jsonl", sessionLogText(engine.log()));
  download("markers.json", markersText(engine.markersSoFar()));
  download("manifest.json", manifestText(subjectInput.value || "anonymous"));
});

function drawStroop(view: Extract<SlideView, { kind: "stroop" }>): void {
  stage.innerHTML = "";
  const word = document.createElement("div");
  word.className = "stroop-word";
  word.textContent = view.word;
  word.style.color = view.inkColor;
  stage.appendChild(word);
  const row = document.createElement("div");
  row.className = "buttons";
  view.buttons.forEach((name, i) => {
    const b = document.createElement("button");
    b.textContent = `${i + 1} ${name}`;
    b.addEventListener("click", () => controller.respond(name));
    row.appendChild(b);
  });
  stage.appendChild(row);
}

function drawMath(view: Extract<SlideView, { kind: "math" }>): void {
  stage.innerHTML = "";
  const prompt = document.createElement("div");
  prompt.className = "math-prompt";
  prompt.textContent = `${view.prompt} ${view.entry}`;
  stage.appendChild(prompt);
}

function drawRest(): void {
  stage.innerHTML = "";
  const pacer = controller.pacer();
  if (pacer === null) {
    return;
  }
  const circle = document.createElement("div");
  circle.className = "pacer";
  const grow = pacer.phase === "inhale" ? pacer.phaseFraction : 1 - pacer.phaseFraction;
  circle.style.transform = `scale(${0.5 + 0.5 * grow})`;
  circle.textContent = pacer.phase;
  stage.appendChild(circle);
}

document.addEventListener("keydown", (ev) => {
  const slide = controller.activeSlide();
  if (slide === null) {
    return;
  }
  if (slide.kind === "stroop") {
    const i = parseInt(ev.key, 10) - 1;
    if (i >= 0 && i < COLORS.length) {
      controller.respond(COLORS[i]);
    }
    return;
  }
  if (/^[0-9]$/.test(ev.key)) {
    entry += ev.key;
  } else if (ev.key === "-" && entry === "") {
    entry = "-";
  } else if (ev.key === "Backspace") {
    entry = entry.slice(0, -1);
  } else if (ev.key === "Enter" && entry !== "" && entry !== "-") {
    if (controller.respond(entry)) {
      entry = "";
    }
  }
});

let lastSlideIndex: number | null = null;

function frame(): void {
  controller.tick();
  const slide = controller.activeSlide();
  if (slide?.index !== lastSlideIndex) {
    entry = "";
    lastSlideIndex = slide?.index ?? null;
  }
  const view = renderSlide(slide, entry);
  if (view.kind === "stroop") {
    if (stage.childElementCount === 0 || stage.dataset.slide !== String(slide!.index)) {
      drawStroop(view);
      stage.dataset.slide = String(slide!.index);
    }
  } else if (view.kind === "math") {
    drawMath(view);
    stage.dataset.slide = String(slide!.index);
  } else {
    drawRest();
    delete stage.dataset.slide;
  }
  const st = controller.status();
  statusLine.textContent = st.running
    ? `scenario ${st.scenarioId ?? "-"} | slide ${st.settledSlides}/${st.totalSlides}`
    : st.complete
      ? "session complete; export the files"
      : st.aborted
        ? `aborted (incomplete log, ${st.settledSlides}/${st.totalSlides} slides)`
        : "load both plans to enable start";
  exportBtn.disabled = st.running || (!st.complete && !st.aborted);
  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
