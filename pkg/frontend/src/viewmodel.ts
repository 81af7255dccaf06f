// Pure view-model helpers. The UI renders server numbers verbatim: nothing
// here recomputes beliefs or costs, it only reshapes payloads for display.

import type { HistoryStep, Pending, SessionState } from "./types.js";
import { isTutor } from "./types.js";

/** phi2 at or above this renders the collinearity warning styling. */
export const COLLINEARITY_WARNING_THRESHOLD = 0.9;

export interface TimelinePoint {
  t: number;
  posterior: number;
  cumCost: number;
}

/** Belief/cost series for the timeline; a fresh session yields a flat zero at t=0. */
export function timelineSeries(history: HistoryStep[]): TimelinePoint[] {
  const points: TimelinePoint[] = [{ t: 0, posterior: 0, cumCost: 0 }];
  for (const h of history) {
    points.push({ t: h.t, posterior: h.posterior_enlightened, cumCost: h.cum_cost });
  }
  return points;
}

export interface SuggestionView {
  kind: "suggest" | "tutor";
  title: string;
  detail: string;
  warning: boolean;
  step: number;
  acceptLabel: string;
  rejectLabel: string | null;
}

export function suggestionView(pending: Pending | null): SuggestionView | null {
  if (pending === null) return null;
  if (isTutor(pending)) {
    return {
      kind: "tutor",
      title: "The assistant offers an explanation",
      detail: pending.explanation,
      warning: false,
      step: pending.step,
      acceptLabel: "Acknowledge",
      rejectLabel: "Dismiss",
    };
  }
  const warning = pending.phi2 >= COLLINEARITY_WARNING_THRESHOLD;
  return {
    kind: "suggest",
    title: `Include ${pending.name} in the model?`,
    detail:
      `|corr to output| ${pending.phi1.toFixed(3)}; ` +
      `max |corr to included| ${pending.phi2.toFixed(3)}`,
    warning,
    step: pending.step,
    acceptLabel: "Accept",
    rejectLabel: "Reject",
  };
}

export interface ModelRow {
  name: string;
  included: boolean;
  corrToOutput: number;
}

export function modelBoard(state: SessionState): ModelRow[] {
  return state.variables.map((v, i) => ({
    name: v.name,
    included: state.model[i] === 1,
    corrToOutput: v.corr_to_output,
  }));
}

/** Parse the server's episode CSV export into history rows. */
export function parseEpisodeCsv(text: string): HistoryStep[] {
  const lines = text.trim().split("\n");
  if (lines[0] !== "t,action,response,posterior_enlightened,true_state,cum_cost") {
    throw new Error(`unexpected episode CSV header: ${lines[0]}`);
  }
  return lines.slice(1).map((line) => {
    const [t, action, response, posterior, _state, cum] = line.split(",");
    return {
      t: Number(t),
      action,
      response: Number(response),
      posterior_enlightened: Number(posterior),
      cum_cost: Number(cum),
    };
  });
}

/**
 * True when the timeline rendered from live state matches the CSV export
 * value for value (the invariant the timeline view promises).
 */
export function timelineMatchesCsv(history: HistoryStep[], csvText: string): boolean {
  const fromCsv = parseEpisodeCsv(csvText);
  if (fromCsv.length !== history.length) return false;
  return history.every(
    (h, i) =>
      fromCsv[i].t === h.t &&
      fromCsv[i].posterior_enlightened === h.posterior_enlightened &&
      fromCsv[i].cum_cost === h.cum_cost,
  );
}

export function formatCost(v: number): string {
  return Number.isInteger(v) ? v.toFixed(0) : v.toFixed(2);
}
