/** Typed fetch client for the session service. */

import type {
  ContextPayload,
  FeedbackPayload,
  MessageResponse,
  StateResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function asJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      if (typeof body?.detail === "string") detail = body.detail;
      else if (body?.detail) detail = JSON.stringify(body.detail);
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    }).then((res) => asJson<T>(res));
  }

  private get<T>(path: string): Promise<T> {
    return this.fetchFn(`${this.baseUrl}${path}`).then((res) => asJson<T>(res));
  }

  async createSession(options?: {
    catalog?: string;
    clientToken?: string;
    context?: ContextPayload;
  }): Promise<string> {
    const body = {
      catalog: options?.catalog ?? null,
      client_token: options?.clientToken ?? null,
      context: options?.context ?? null,
    };
    const res = await this.post<{ session_id: string }>("/sessions", body);
    return res.session_id;
  }

  postMessage(
    sessionId: string,
    text: string,
    feedback?: FeedbackPayload,
  ): Promise<MessageResponse> {
    return this.post<MessageResponse>(`/sessions/${sessionId}/messages`, {
      text,
      feedback: feedback ?? null,
    });
  }

  getState(sessionId: string): Promise<StateResponse> {
    return this.get<StateResponse>(`/sessions/${sessionId}/state`);
  }

  health(): Promise<{ status: string }> {
    return this.get<{ status: string }>("/healthz");
  }
}
