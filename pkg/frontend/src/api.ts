import type {
  ClassifyResponse,
  Label,
  Report,
  RetrainResponse,
  TriageItem,
} from "./types.js";

/** Raised for any non-2xx response; `status` is the HTTP status code. */
export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

/** Raised when the service cannot be reached at all. */
export class ConnectivityError extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${String(cause)}`);
    this.name = "ConnectivityError";
  }
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; text(): Promise<string> }>;

/**
 * Thin typed client over the service's HTTP endpoints.  The fetch
 * implementation is injectable so tests can run against a mock service.
 */
export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: Parameters<FetchLike>[1]): Promise<T> {
    const text = await this.requestText(path, init);
    return JSON.parse(text) as T;
  }

  private async requestText(
    path: string,
    init?: Parameters<FetchLike>[1],
  ): Promise<string> {
    let response: Awaited<ReturnType<FetchLike>>;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ConnectivityError(err);
    }
    const text = await response.text();
    if (response.status < 200 || response.status >= 300) {
      let detail = text;
      try {
        detail = JSON.parse(text).detail ?? text;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return text;
  }

  private post<T>(path: string, body?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  }

  classify(rule: string): Promise<ClassifyResponse> {
    return this.post("/classify", { rule });
  }

  async getQueue(): Promise<TriageItem[]> {
    const body = await this.request<{ items: TriageItem[] }>("/triage");
    return body.items;
  }

  label(id: string, label: Label): Promise<TriageItem> {
    return this.post(`/triage/${id}/label`, { label });
  }

  retrain(): Promise<RetrainResponse> {
    return this.post("/retrain");
  }

  getReport(): Promise<Report> {
    return this.request("/report");
  }

  getArcCsv(): Promise<string> {
    return this.requestText("/arc");
  }
}
