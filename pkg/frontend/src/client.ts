// Thin typed wrapper over the moderation service. The fetch function is
// injectable so tests can run against a scripted stub server.

import type {
  ExplainJob,
  FeedbackBody,
  Prediction,
  RationaleBody,
  RegistryEntry,
  XaiMethod,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface ExplainRequest {
  modality: "text" | "meme";
  model_id: string;
  xai_method: XaiMethod;
  target?: string;
  text?: string;
  image_b64?: string;
  seed?: number;
  n_perturbations?: number;
  n_regions?: number;
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async parse<T>(response: Response): Promise<T> {
    const payload = await response.json();
    if (!response.ok) {
      const code = payload?.error?.code ?? "http_error";
      const message = payload?.error?.message ?? `HTTP ${response.status}`;
      throw new ApiRequestError(response.status, code, message);
    }
    return payload as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.parse<T>(response);
  }

  async models(): Promise<RegistryEntry[]> {
    const response = await this.fetchFn(this.baseUrl + "/models");
    const payload = await this.parse<{ models: RegistryEntry[] }>(response);
    return payload.models;
  }

  predictText(modelId: string, text: string): Promise<Prediction> {
    return this.postJson("/predict/text", { model_id: modelId, text });
  }

  async predictMeme(modelId: string, image: Blob, text?: string): Promise<Prediction> {
    const form = new FormData();
    form.append("model_id", modelId);
    form.append("image", image, "upload.png");
    if (text !== undefined) form.append("text", text);
    const response = await this.fetchFn(this.baseUrl + "/predict/meme", {
      method: "POST",
      body: form,
    });
    return this.parse<Prediction>(response);
  }

  submitExplain(request: ExplainRequest): Promise<ExplainJob> {
    return this.postJson("/explain", request);
  }

  async explainStatus(jobId: string): Promise<ExplainJob> {
    const response = await this.fetchFn(this.baseUrl + `/explain/${jobId}`);
    return this.parse<ExplainJob>(response);
  }

  async submitRationale(body: RationaleBody): Promise<number> {
    const payload = await this.postJson<{ id: number }>("/rationale", body);
    return payload.id;
  }

  async submitFeedback(body: FeedbackBody): Promise<number> {
    const payload = await this.postJson<{ id: number }>("/feedback", body);
    return payload.id;
  }

  artifactUrl(path: string): string {
    return this.baseUrl + path;
  }
}
