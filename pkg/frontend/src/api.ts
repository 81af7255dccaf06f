// Session API client. One in-flight request per session, enforced here: a
// second mutation while one is pending is rejected client-side.

import type { CreateResponse, SessionState, TerminalReport } from "./types.js";
import { assertSessionState } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export class SessionApi {
  private inFlight = false;

  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  get busy(): boolean {
    return this.inFlight;
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    if (this.inFlight) {
      throw new ApiError(0, "a request is already in flight");
    }
    this.inFlight = true;
    try {
      const resp = await this.fetchImpl(this.base + path, init);
      if (!resp.ok) {
        let detail = resp.statusText;
        try {
          const body = (await resp.json()) as { detail?: string };
          if (body.detail) detail = body.detail;
        } catch {
          // non-JSON error body: keep the status text
        }
        throw new ApiError(resp.status, detail);
      }
      return await resp.json();
    } finally {
      this.inFlight = false;
    }
  }

  async createSession(seed?: number, horizon?: number): Promise<CreateResponse> {
    const body: Record<string, number> = {};
    if (seed !== undefined) body.seed = seed;
    if (horizon !== undefined) body.horizon = horizon;
    const data = (await this.request("/api/v1/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    })) as CreateResponse;
    assertSessionState(data.state);
    return data;
  }

  async getState(sessionId: string): Promise<SessionState> {
    const data = (await this.request(`/api/v1/sessions/${sessionId}`)) as {
      state: SessionState;
    };
    return assertSessionState(data.state);
  }

  async postResponse(
    sessionId: string,
    step: number,
    response: 0 | 1,
  ): Promise<{ state: SessionState; terminal?: TerminalReport }> {
    const data = (await this.request(`/api/v1/sessions/${sessionId}/response`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ response, step }),
    })) as { state: SessionState; terminal?: TerminalReport };
    assertSessionState(data.state);
    return data;
  }

  async endSession(sessionId: string): Promise<{ terminal: TerminalReport; csv: string }> {
    return (await this.request(`/api/v1/sessions/${sessionId}/end`, {
      method: "POST",
    })) as { terminal: TerminalReport; csv: string };
  }

  csvUrl(sessionId: string): string {
    return `${this.base}/api/v1/sessions/${sessionId}/episode.csv`;
  }
}
