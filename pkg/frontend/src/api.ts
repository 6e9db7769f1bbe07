// Typed client for the consultation service. The fetch implementation is
// injectable so tests can record every request and serve canned responses.

import type {
  ArticleKey,
  BallotTask,
  ConsultTurn,
  RankingSummary,
  RetrieveResponse,
  SessionPayload,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

export interface RankingEntry {
  token?: string;
  system_id?: string;
  rank: number;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) =>
      globalThis.fetch(url, init) as ReturnType<FetchLike>,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      throw new ApiError(response.status, String(payload["detail"] ?? "request failed"));
    }
    return payload as T;
  }

  createSession(): Promise<{ session_id: string }> {
    return this.request("POST", "/api/sessions");
  }

  getSession(sessionId: string): Promise<SessionPayload> {
    return this.request("GET", `/api/sessions/${sessionId}`);
  }

  /** Posts a turn. Omit includedKeys to accept the server default (all retrieved). */
  postTurn(
    sessionId: string,
    message: string,
    includedKeys?: ArticleKey[],
    k?: number,
  ): Promise<ConsultTurn> {
    const body: Record<string, unknown> = { message };
    if (k !== undefined) body["k"] = k;
    if (includedKeys !== undefined) {
      body["included_keys"] = includedKeys.map((key) => ({
        title: key.title,
        article: key.article,
        paragraph: key.paragraph ?? null,
      }));
    }
    return this.request("POST", `/api/sessions/${sessionId}/turns`, body);
  }

  retrieve(query: string, k = 3): Promise<RetrieveResponse> {
    return this.request("POST", "/api/retrieve", { query, k });
  }

  ballotTasks(): Promise<{ tasks: BallotTask[] }> {
    return this.request("GET", "/api/rankings/tasks");
  }

  postRanking(questionId: string, entries: RankingEntry[], draw = false): Promise<unknown> {
    return this.request("POST", "/api/rankings", {
      question_id: questionId,
      entries,
      draw,
    });
  }

  rankingSummary(): Promise<RankingSummary> {
    return this.request("GET", "/api/rankings/summary");
  }
}
