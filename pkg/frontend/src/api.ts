// Thin typed client over the exploration service; every number shown in the
// UI comes back through here untouched.

import type {
  ApiErrorPayload,
  CandidatesPayload,
  EvaluateResponse,
  GalleryView,
  RunSummary,
} from "./types.js";

export class ApiError extends Error {
  code: string;
  detail: string;
  status: number;

  constructor(status: number, payload: ApiErrorPayload) {
    super(payload.message);
    this.status = status;
    this.code = payload.code;
    this.detail = payload.detail;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private baseUrl: string;
  private fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    const body = await response.json();
    if (!response.ok) {
      const payload: ApiErrorPayload = {
        code: body?.code ?? "http_error",
        message: body?.message ?? `request failed with status ${response.status}`,
        detail: body?.detail ?? "",
      };
      throw new ApiError(response.status, payload);
    }
    return body as T;
  }

  listRuns(): Promise<RunSummary[]> {
    return this.request<RunSummary[]>("/runs");
  }

  getRun(run: string): Promise<Record<string, unknown>> {
    return this.request<Record<string, unknown>>(`/runs/${encodeURIComponent(run)}`);
  }

  getCandidates(run: string): Promise<CandidatesPayload> {
    return this.request<CandidatesPayload>(`/runs/${encodeURIComponent(run)}/candidates`);
  }

  getGallery(run: string, itemId: string): Promise<GalleryView> {
    const composite = encodeURIComponent(`${run}:${itemId}`);
    return this.request<GalleryView>(`/pairs/${composite}/gallery`);
  }

  evaluate(run: string, concepts: string[]): Promise<EvaluateResponse> {
    return this.request<EvaluateResponse>("/concepts/evaluate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ concepts, run }),
    });
  }
}
