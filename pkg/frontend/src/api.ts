/** Typed fetch client for the session service. */

import type {
  CreateSessionResponse,
  Mode,
  NarrativeArc,
  TurnResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

/** 409 from the utterance endpoint: the scene reached its turn limit. */
export class SceneCompleteError extends ApiError {
  constructor(message: string) {
    super(409, message);
  }
}

async function parseError(response: Response): Promise<never> {
  let message = response.statusText;
  try {
    const body = (await response.json()) as { message?: string };
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the status text
  }
  if (response.status === 409) throw new SceneCompleteError(message);
  throw new ApiError(response.status, message);
}

export interface StartSessionOptions {
  mode?: Mode;
  alpha?: number;
  method?: string;
  seed?: number;
  turnLimit?: number;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; version: string; universes: string[] }> {
    return this.get("/healthz");
  }

  startSession(options: StartSessionOptions): Promise<CreateSessionResponse> {
    const body: Record<string, unknown> = {};
    if (options.mode !== undefined) body.mode = options.mode;
    if (options.alpha !== undefined) body.alpha = options.alpha;
    if (options.method !== undefined) body.method = options.method;
    if (options.seed !== undefined) body.seed = options.seed;
    if (options.turnLimit !== undefined) body.turn_limit = options.turnLimit;
    return this.post("/sessions", body);
  }

  sendUtterance(sessionId: string, text: string, diagnostics = false): Promise<TurnResponse> {
    const query = diagnostics ? "?diagnostics=true" : "";
    return this.post(`/sessions/${sessionId}/utterance${query}`, { text });
  }

  getArc(sessionId: string): Promise<NarrativeArc> {
    return this.get(`/sessions/${sessionId}/arc`);
  }
}
