// Typed client for the /v1 endpoints. Decisions and submissions reject on
// any non-2xx response so the UI can surface the failure instead of
// silently dropping input.

import type {
  AnnotationResponse,
  DecisionResponse,
  SearchResult,
  SessionInfo,
  TaskPayload,
  Treatment,
} from "./types";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  token: string | null = null;

  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
    }
    if (this.token) {
      headers["X-Session-Token"] = this.token;
    }
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        const parsed = JSON.parse(text);
        if (parsed && typeof parsed.detail === "string") {
          detail = parsed.detail;
        }
      } catch {
        // keep the raw body
      }
      throw new ApiError(response.status, detail || `HTTP ${response.status}`);
    }
    return JSON.parse(text) as T;
  }

  async openSession(participant: string, treatment?: Treatment): Promise<SessionInfo> {
    const body: Record<string, unknown> = { participant };
    if (treatment) {
      body.treatment = treatment;
    }
    const info = await this.request<SessionInfo>("POST", "/v1/session", body);
    this.token = info.token;
    return info;
  }

  getTask(): Promise<TaskPayload> {
    return this.request<TaskPayload>("GET", "/v1/task");
  }

  postDecision(stem: string, code: string, action: "accept" | "reject"): Promise<DecisionResponse> {
    return this.request<DecisionResponse>("POST", "/v1/decision", { stem, code, action });
  }

  postAnnotation(
    requirementId: string,
    confCorrect: number,
    confComplete: number,
    associations: { term: string; code: string }[],
  ): Promise<AnnotationResponse> {
    // The duration is never sent: the server clocks it from task open to
    // this submission.
    return this.request<AnnotationResponse>("POST", "/v1/annotation", {
      requirement_id: requirementId,
      conf_correct: confCorrect,
      conf_complete: confComplete,
      associations,
    });
  }

  async search(query: string, limit = 10): Promise<SearchResult[]> {
    const params = new URLSearchParams({ q: query, limit: String(limit) });
    const body = await this.request<{ results: SearchResult[] }>(
      "GET",
      `/v1/search?${params.toString()}`,
    );
    return body.results;
  }
}
