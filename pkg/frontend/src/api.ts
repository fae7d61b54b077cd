// Thin fetch client for the service API. Errors bubble up with the server's
// own error envelope so views can surface them verbatim.

import type {
  AggregateDoc,
  AnalyticsReport,
  ApiErrorBody,
  BatchDoc,
  CreateExperimentResponse,
  ExperimentDoc,
  JoinResponse,
  ModelDoc,
  TraitRecordDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private token: string | null = null,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let envelope: ApiErrorBody;
      try {
        envelope = (await response.json()) as ApiErrorBody;
      } catch {
        envelope = {
          code: "validation_error",
          message: `HTTP ${response.status}`,
          detail: {},
        };
      }
      throw new ApiError(response.status, envelope);
    }
    return (await response.json()) as T;
  }

  /** Raw response text: needed where the UI must show server bytes verbatim. */
  async rawGet(path: string): Promise<string> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(this.baseUrl + path, { headers });
    if (!response.ok) {
      throw new ApiError(response.status, (await response.json()) as ApiErrorBody);
    }
    return await response.text();
  }

  // researcher
  createExperiment(body: unknown): Promise<CreateExperimentResponse> {
    return this.request("POST", "/researcher/experiments", body);
  }
  getExperiment(id: string): Promise<ExperimentDoc> {
    return this.request("GET", `/researcher/experiments/${id}`);
  }
  getLinks(id: string): Promise<{ links: string[] }> {
    return this.request("GET", `/researcher/experiments/${id}/links`);
  }
  getAnalytics(id: string): Promise<AnalyticsReport> {
    return this.request("GET", `/researcher/experiments/${id}/analytics`);
  }
  closeExperiment(id: string): Promise<ExperimentDoc> {
    return this.request("POST", `/researcher/experiments/${id}/close`);
  }
  exportUrl(id: string): string {
    return `${this.baseUrl}/researcher/experiments/${id}/export`;
  }

  // join + participant
  join(params: URLSearchParams): Promise<JoinResponse> {
    return this.request("GET", `/researcher/join-experiment?${params.toString()}`);
  }
  listExemplars(): Promise<{ exemplars: { name: string; model: ModelDoc }[] }> {
    return this.request("GET", "/exemplars");
  }
  createModel(body: unknown): Promise<ModelDoc> {
    return this.request("POST", "/models", body);
  }
  getModel(id: string): Promise<ModelDoc> {
    return this.request("GET", `/models/${id}`);
  }
  editModel(id: string, body: unknown): Promise<ModelDoc> {
    return this.request("PUT", `/models/${id}`, body);
  }
  cloneModel(id: string): Promise<ModelDoc> {
    return this.request("POST", `/models/${id}/clone`, {});
  }
  setParameter(id: string, body: unknown): Promise<{ old: number; new: number }> {
    return this.request("POST", `/models/${id}/parameters`, body);
  }
  simulate(id: string, body: unknown): Promise<{ batch: string; runs: number; status: string }> {
    return this.request("POST", `/models/${id}/simulate`, body);
  }
  getBatch(batch: string): Promise<BatchDoc> {
    return this.request("GET", `/simulations/${batch}`);
  }
  getAggregate(batch: string, target: string): Promise<AggregateDoc> {
    return this.request(
      "GET",
      `/simulations/${batch}/aggregate?target=${encodeURIComponent(target)}`,
    );
  }
  lookupTraits(name: string): Promise<TraitRecordDoc> {
    return this.request("GET", `/traits?name=${encodeURIComponent(name)}`);
  }
  applyTraits(id: string, body: unknown): Promise<{ species: string; changes: unknown[] }> {
    return this.request("POST", `/models/${id}/apply-traits`, body);
  }
}
