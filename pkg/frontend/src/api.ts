/**
 * Thin client over the curation service endpoints. Every mutation the UI
 * performs goes through these five calls and nothing else.
 *
 * The fetch function is injected so tests can stand up a stub server and
 * main.ts can pass the browser's fetch.
 */

import type {
  AcceptResponse,
  CandidatePage,
  Channel,
  RulesExport,
  Scope,
  ServiceStats,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Error carrying the service's {code, message} payload plus HTTP status. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

async function parseError(response: Response): Promise<ServiceError> {
  try {
    const body = await response.json();
    return new ServiceError(
      response.status,
      typeof body.code === "string" ? body.code : "unknown_error",
      typeof body.message === "string" ? body.message : response.statusText,
    );
  } catch {
    return new ServiceError(response.status, "unknown_error", response.statusText);
  }
}

export class CurationApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  listCandidates(channel: Channel, page: number, pageSize: number): Promise<CandidatePage> {
    const query = new URLSearchParams({
      channel,
      page: String(page),
      page_size: String(pageSize),
    });
    return this.request<CandidatePage>(`/candidates?${query}`);
  }

  accept(id: string, replacement: string, scope: Scope): Promise<AcceptResponse> {
    return this.request<AcceptResponse>(`/candidates/${encodeURIComponent(id)}/accept`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ replacement, scope }),
    });
  }

  dismiss(id: string, note: string): Promise<{ id: string; status: string }> {
    return this.request(`/candidates/${encodeURIComponent(id)}/dismiss`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ note }),
    });
  }

  exportRules(): Promise<RulesExport> {
    return this.request<RulesExport>("/rules/export");
  }

  stats(): Promise<ServiceStats> {
    return this.request<ServiceStats>("/stats");
  }
}
