// Wire types mirroring the session service payloads (schema_version 1).

export interface SuggestPayload {
  step: number;
  kind: "suggest";
  index: number;
  name: string;
  phi1: number;
  phi2: number;
  corr_to_output: number;
}

export interface TutorPayload {
  step: number;
  kind: "tutor";
  explanation: string;
  heatmap: { names: string[]; abs_corr: number[][] };
}

export type Pending = SuggestPayload | TutorPayload;

export interface HistoryStep {
  t: number;
  action: string;
  response: number;
  posterior_enlightened: number;
  cum_cost: number;
}

export interface VariableInfo {
  name: string;
  corr_to_output: number;
}

export interface SessionState {
  schema_version: number;
  status: "active" | "finished";
  step: number;
  horizon: number;
  model: number[];
  alpha: number;
  mean_w1: number;
  mean_w2: number;
  w2_from_prior: boolean;
  cum_cost: number;
  pending: Pending | null;
  history: HistoryStep[];
  variables: VariableInfo[];
}

export interface TerminalReport {
  schema_version: number;
  is_estimate: boolean;
  alpha: number;
  stage_cost_total: number;
  terminal_current: number;
  terminal_future_estimate: number;
  terminal_cost_estimate: number;
  total_cost_estimate: number;
  manipulation_estimate: number;
}

export interface CreateResponse {
  session_id: string;
  seed: number;
  state: SessionState;
}

export function isTutor(p: Pending): p is TutorPayload {
  return p.kind === "tutor";
}

/** Minimal structural check; the UI never repairs malformed payloads. */
export function assertSessionState(data: unknown): SessionState {
  const s = data as SessionState;
  if (
    typeof s !== "object" || s === null ||
    typeof s.step !== "number" ||
    typeof s.horizon !== "number" ||
    !Array.isArray(s.model) ||
    !Array.isArray(s.history) ||
    typeof s.alpha !== "number"
  ) {
    throw new Error("malformed session state payload");
  }
  return s;
}
