import type {
  DiagnoseResponse,
  EvaluateRequest,
  EvaluateResponse,
  IterationRecord,
  QueueItem,
  ReviewResponse,
  TaxonomyResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const err = (body as { error?: { code?: string; message?: string } })?.error;
      throw new ApiError(
        response.status,
        err?.code ?? `http_${response.status}`,
        err?.message ?? `request failed with HTTP ${response.status}`,
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getTaxonomy(): Promise<TaxonomyResponse> {
    return this.request("/api/taxonomy");
  }

  async getQueue(): Promise<QueueItem[]> {
    const body = await this.request<{ items: QueueItem[] }>("/api/review/queue");
    return body.items;
  }

  submitReview(sampleId: string, labels: string[], reviewer?: string): Promise<ReviewResponse> {
    return this.post(`/api/review/${encodeURIComponent(sampleId)}`, {
      labels,
      reviewer: reviewer ?? null,
    });
  }

  skipReview(sampleId: string, reviewer?: string): Promise<ReviewResponse> {
    return this.post(`/api/review/${encodeURIComponent(sampleId)}`, {
      labels: [],
      reviewer: reviewer ?? null,
      skip: true,
    });
  }

  async getIterations(): Promise<IterationRecord[]> {
    const body = await this.request<{ iterations: IterationRecord[] }>("/api/iterations");
    return body.iterations;
  }

  async advanceIteration(): Promise<IterationRecord> {
    const body = await this.post<{ iteration: IterationRecord }>(
      "/api/iterations/advance",
      {},
    );
    return body.iteration;
  }

  evaluate(request: EvaluateRequest): Promise<EvaluateResponse> {
    return this.post("/api/evaluate", request);
  }

  diagnose(passage: string, answer: string, question: string): Promise<DiagnoseResponse> {
    return this.post("/api/diagnose", { passage, answer, question });
  }
}
