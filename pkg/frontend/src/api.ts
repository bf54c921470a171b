// Thin typed client over the HTTP API. Every screenful of data comes from
// one of these calls.

import type {
  CascadePlan,
  DataReport,
  EvaluationReport,
  GuidanceMessage,
  InputError,
  Job,
  ModelMetadata,
  Prediction,
  PreflightIssue,
  TrainingConfigInput,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public payload: unknown,
  ) {
    super(`API error ${status}`);
  }

  get inputErrors(): InputError[] {
    const p = this.payload as { errors?: InputError[] } | null;
    return p?.errors ?? [];
  }

  get preflightIssues(): PreflightIssue[] {
    const p = this.payload as { issues?: PreflightIssue[] } | null;
    return p?.issues ?? [];
  }
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, payload);
    }
    return payload as T;
  }

  uploadDataset(data: Blob | string): Promise<{ dataset_id: string; report: DataReport }> {
    return this.request("/api/datasets", { method: "POST", body: data });
  }

  datasetReport(datasetId: string): Promise<DataReport> {
    return this.request(`/api/datasets/${datasetId}/report`);
  }

  cascadePlanPreview(datasetId: string, target: string): Promise<CascadePlan> {
    const query = new URLSearchParams({ target });
    return this.request(`/api/datasets/${datasetId}/cascade-plan?${query}`);
  }

  train(datasetId: string, config: TrainingConfigInput): Promise<{ job_id: string }> {
    return this.request("/api/train", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ dataset_id: datasetId, config }),
    });
  }

  job(jobId: string): Promise<Job> {
    return this.request(`/api/jobs/${jobId}`);
  }

  modelMetadata(modelId: string): Promise<ModelMetadata> {
    return this.request(`/api/models/${modelId}/metadata`);
  }

  modelReport(modelId: string): Promise<EvaluationReport> {
    return this.request(`/api/models/${modelId}/report`);
  }

  predict(modelId: string, inputs: Record<string, string>): Promise<Prediction> {
    return this.request(`/api/models/${modelId}/predict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ inputs }),
    });
  }

  guidance(context: unknown): Promise<GuidanceMessage[]> {
    return this.request("/api/guidance", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ context }),
    });
  }
}
