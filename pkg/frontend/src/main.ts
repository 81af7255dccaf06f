// App wiring: state lives on the server, this file only renders and relays.

import { ApiError, SessionApi } from "./api.js";
import { chartSvg } from "./charts.js";
import type { SessionState, TerminalReport, TutorPayload } from "./types.js";
import {
  formatCost,
  modelBoard,
  suggestionView,
  timelineSeries,
} from "./viewmodel.js";

const api = new SessionApi();

interface AppState {
  sessionId: string | null;
  state: SessionState | null;
  terminal: TerminalReport | null;
  error: string | null;
}

const app: AppState = { sessionId: null, state: null, terminal: null, error: null };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  for (const c of children) node.append(c);
  return node;
}

async function guard(action: () => Promise<void>): Promise<void> {
  try {
    app.error = null;
    await action();
  } catch (err) {
    if (err instanceof ApiError && err.status === 409 && app.sessionId) {
      // out of sync with the server: re-fetch rather than retrying blindly
      app.state = await api.getState(app.sessionId);
      app.error = `re-synced with server (${err.message})`;
    } else {
      app.error = err instanceof Error ? err.message : String(err);
    }
  }
  render();
}

async function startSession(seedText: string): Promise<void> {
  const seed = seedText.trim() === "" ? undefined : Number(seedText);
  const created = await api.createSession(seed);
  app.sessionId = created.session_id;
  app.state = created.state;
  app.terminal = null;
  location.hash = created.session_id;
}

async function respond(step: number, b: 0 | 1): Promise<void> {
  if (!app.sessionId) return;
  const out = await api.postResponse(app.sessionId, step, b);
  app.state = out.state;
  if (out.terminal) app.terminal = out.terminal;
}

async function endSession(): Promise<void> {
  if (!app.sessionId) return;
  const out = await api.endSession(app.sessionId);
  app.terminal = out.terminal;
  app.state = app.sessionId ? await api.getState(app.sessionId) : app.state;
}

function renderSuggestion(root: HTMLElement, state: SessionState): void {
  const view = suggestionView(state.pending);
  const panel = el("section", { class: "panel suggestion" });
  panel.append(el("h2", {}, ["Assistant"]));
  if (view === null) {
    panel.append(el("p", { class: "muted" }, ["No suggestion outstanding."]));
    const accept = el("button", { disabled: "true" }, ["Accept"]);
    const reject = el("button", { disabled: "true" }, ["Reject"]);
    panel.append(accept, reject);
  } else {
    const card = el("div", { class: view.warning ? "card warning" : "card" });
    card.append(el("h3", {}, [view.title]));
    card.append(el("p", {}, [view.detail]));
    if (view.warning) {
      card.append(el("p", { class: "warn-note" }, ["High overlap with an included column."]));
    }
    if (view.kind === "tutor" && state.pending && state.pending.kind === "tutor") {
      card.append(renderHeatmap(state.pending));
    }
    const accept = el("button", { class: "accept" }, [view.acceptLabel]);
    accept.onclick = () => void guard(() => respond(view.step, 1));
    card.append(accept);
    if (view.rejectLabel) {
      const reject = el("button", { class: "reject" }, [view.rejectLabel]);
      reject.onclick = () => void guard(() => respond(view.step, 0));
      card.append(reject);
    }
    panel.append(card);
  }
  root.append(panel);
}

function renderHeatmap(pending: TutorPayload): HTMLElement {
  const table = el("table", { class: "heatmap" });
  const head = el("tr", {}, [el("th", {}, [""])]);
  for (const name of pending.heatmap.names) head.append(el("th", {}, [name]));
  table.append(head);
  pending.heatmap.abs_corr.forEach((row, i) => {
    const tr = el("tr", {}, [el("th", {}, [pending.heatmap.names[i]])]);
    for (const v of row) {
      const shade = Math.round(255 - 155 * v);
      tr.append(
        el("td", { style: `background: rgb(255,${shade},${shade})` }, [v.toFixed(2)]),
      );
    }
    table.append(tr);
  });
  return table;
}

function renderTimeline(root: HTMLElement, state: SessionState): void {
  const points = timelineSeries(state.history);
  const xs = points.map((p) => p.t);
  const spec = { width: 420, height: 150, pad: 24 };
  const panel = el("section", { class: "panel" });
  panel.append(el("h2", {}, ["Teacher's view over time"]));
  const beliefDiv = el("div", { class: "chart" });
  beliefDiv.innerHTML = chartSvg(
    [{ data: { xs, ys: points.map((p) => p.posterior) }, color: "#2563eb", label: "P(enlightened)" }],
    { ...spec, yMin: 0, yMax: 1 },
  );
  const costDiv = el("div", { class: "chart" });
  costDiv.innerHTML = chartSvg(
    [{ data: { xs, ys: points.map((p) => p.cumCost) }, color: "#dc2626", label: "cumulative cost" }],
    spec,
  );
  panel.append(beliefDiv, costDiv);
  panel.append(
    el("p", { class: "muted" }, [
      `step ${state.step}/${state.horizon} - P(enlightened) ${state.alpha.toFixed(3)} - ` +
        `cumulative cost ${formatCost(state.cum_cost)}`,
    ]),
  );
  root.append(panel);
}

function renderBoard(root: HTMLElement, state: SessionState): void {
  const panel = el("section", { class: "panel" });
  panel.append(el("h2", {}, ["Your model"]));
  const table = el("table", { class: "board" });
  table.append(
    el("tr", {}, [el("th", {}, ["column"]), el("th", {}, ["included"]), el("th", {}, ["|corr to y|"])]),
  );
  for (const row of modelBoard(state)) {
    table.append(
      el("tr", { class: row.included ? "included" : "" }, [
        el("td", {}, [row.name]),
        el("td", {}, [row.included ? "yes" : "no"]),
        el("td", {}, [Math.abs(row.corrToOutput).toFixed(3)]),
      ]),
    );
  }
  panel.append(table);
  if (app.sessionId) {
    const link = el("a", { href: api.csvUrl(app.sessionId), download: "episode.csv" }, [
      "Download episode CSV",
    ]);
    panel.append(el("p", {}, [link]));
  }
  if (state.status === "active") {
    const endBtn = el("button", { class: "secondary" }, ["End session"]);
    endBtn.onclick = () => void guard(endSession);
    panel.append(endBtn);
  }
  if (app.terminal) {
    const t = app.terminal;
    const report = el("div", { class: "card report" });
    report.append(el("h3", {}, ["Final report (estimates under the teacher's belief)"]));
    const list = el("ul", {}, []);
    list.append(el("li", {}, [`stage cost total: ${formatCost(t.stage_cost_total)}`]));
    list.append(el("li", {}, [`current-dataset cost: ${formatCost(t.terminal_current)}`]));
    list.append(
      el("li", {}, [`future unassisted cost estimate: ${t.terminal_future_estimate.toFixed(2)}`]),
    );
    list.append(el("li", {}, [`total cost estimate: ${t.total_cost_estimate.toFixed(2)}`]));
    list.append(el("li", {}, [`manipulation estimate: ${t.manipulation_estimate.toFixed(2)}`]));
    list.append(el("li", {}, [`P(enlightened): ${t.alpha.toFixed(3)}`]));
    report.append(list);
    panel.append(report);
  }
  root.append(panel);
}

function render(): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.textContent = "";
  const header = el("header", {}, [el("h1", {}, ["Model-building assistant"])]);
  const seedInput = el("input", { placeholder: "seed (optional)", id: "seed" });
  const startBtn = el("button", { class: "accept" }, ["New session"]);
  startBtn.onclick = () => void guard(() => startSession(seedInput.value));
  header.append(seedInput, startBtn);
  root.append(header);
  if (app.error) root.append(el("p", { class: "error" }, [app.error]));
  if (app.state) {
    renderSuggestion(root, app.state);
    renderTimeline(root, app.state);
    renderBoard(root, app.state);
  } else {
    root.append(
      el("p", { class: "muted" }, [
        "Start a session: the assistant suggests columns for your linear model, " +
          "you accept or reject each one.",
      ]),
    );
  }
}

async function boot(): Promise<void> {
  const fromHash = location.hash.replace(/^#/, "");
  if (fromHash) {
    try {
      app.state = await api.getState(fromHash);
      app.sessionId = fromHash;
    } catch {
      location.hash = "";
    }
  }
  render();
}

void boot();
