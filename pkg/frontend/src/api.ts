// Thin fetch wrapper around the session endpoints. All game state lives on
// the server; this module only moves JSON.

import type { ActionName, ActionResponse, CreateSessionResponse, View } from "./types.js";

export class ApiError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && body.detail) detail = JSON.stringify(body.detail);
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  base: string;

  constructor(base = "") {
    this.base = base.replace(/\/$/, "");
  }

  async createSession(
    condition: string,
    overrides?: Record<string, unknown>,
  ): Promise<CreateSessionResponse> {
    const response = await fetch(`${this.base}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ condition, config_overrides: overrides ?? null }),
    });
    return parseOrThrow<CreateSessionResponse>(response);
  }

  async getState(sessionId: string): Promise<View> {
    const response = await fetch(`${this.base}/sessions/${sessionId}/state`);
    return parseOrThrow<View>(response);
  }

  async submitAction(sessionId: string, action: ActionName): Promise<ActionResponse> {
    const response = await fetch(`${this.base}/sessions/${sessionId}/action`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ action }),
    });
    return parseOrThrow<ActionResponse>(response);
  }

  async getLog(sessionId: string): Promise<unknown> {
    const response = await fetch(`${this.base}/sessions/${sessionId}/log`);
    return parseOrThrow<unknown>(response);
  }
}
