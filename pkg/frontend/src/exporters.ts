/**
 * File exports in the analysis toolkit's interchange formats.
 *
 * The log is JSON Lines, one record per presented slide; markers and
 * the (channel-less) manifest are small JSON documents.  The log is
 * kept append-only in memory and serialised in one piece here, at
 * export time.
 */

import { LogRecord } from "./session.js";
import { SessionMarkers } from "./protocol.js";

/** Serialise the session log as JSON Lines. */
export function sessionLogText(records: LogRecord[]): string {
  const lines = records.map((r) =>
    JSON.stringify({
      slide_index: r.slideIndex,
      presented_at_ms: r.presentedAtMs,
      response: r.response,
      responded_at_ms: r.respondedAtMs,
    }),
  );
  return lines.length > 0 ? lines.join("\n") + "\n" : "";
}

/** Serialise boundary markers (full or partial). */
export function markersText(markers: SessionMarkers): string {
  const doc = {
    scenarios: markers.scenarios.map((sc) => ({
      id: sc.id,
      kind: sc.kind,
      start_s: sc.startS,
      end_s: sc.endS,
    })),
    levels: markers.levels.map((iv) => ({
      scenario_id: iv.scenarioId,
      level: iv.level,
      start_s: iv.startS,
      end_s: iv.endS,
    })),
  };
  return JSON.stringify(doc, null, 2) + "\n";
}

/**
 * Manifest for a runner-only session: a subject id and no channel
 * entries (the runner records no physiology; signal files come from
 * the acquisition side and are merged later if at all).
 */
export function manifestText(subjectId: string): string {
  if (subjectId.length === 0) {
    throw new Error("subject id must not be empty");
  }
  const doc = { subject_id: subjectId, entries: [] };
  return JSON.stringify(doc, null, 2) + "\n";
}
