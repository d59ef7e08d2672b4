// Payload shapes mirroring the server's published JSON schemas
// (src/misodetect/api/schemas/ in the service repo).

export type Modality = "text" | "meme";
export type XaiMethod = "lime" | "kernel_shap";

export interface RegistryEntry {
  model_id: string;
  modality: Modality;
  checkpoint: string;
  metrics: Record<string, number>;
}

export interface Prediction {
  binary_label: string;
  binary_confidence: number;
  sublabel_scores: Record<string, number>;
  active_sublabels: string[];
  model_id: string;
  truncated: boolean;
  ocr?: { raw_text: string; engine_id: string; confidence: number | null } | null;
}

export interface TokenAttribution {
  surface: string;
  char_start: number;
  char_end: number;
  weight: number;
}

export interface AttributionReport {
  method: XaiMethod;
  target: string;
  tokens: TokenAttribution[];
  base_value: number;
  n_perturbations: number;
  seed: number;
  fidelity_r2: number | null;
}

export interface SaliencyMapSummary {
  shape: [number, number];
  grid: [number, number];
  region_weights: Record<string, number>;
  method: XaiMethod;
  target: string;
  seed: number;
}

export interface ExplainResult {
  attribution_report?: AttributionReport;
  saliency_map?: SaliencyMapSummary;
  artifact_url?: string;
}

export type JobStatus = "queued" | "running" | "done" | "failed";

export interface ExplainJob {
  job_id: string;
  status: JobStatus;
  submitted_at: string;
  seed: number;
  result: ExplainResult | null;
  error: string | null;
}

export interface RationaleBody {
  sample_ref: string;
  text: string;
  spans: [number, number][];
  annotator_id: string;
}

export type FeedbackKind = "prediction" | "explanation";

export interface FeedbackBody {
  kind: FeedbackKind;
  sample_ref: string;
  model_id: string;
  answers: Record<string, number>;
  xai_method?: XaiMethod | null;
  free_text?: string | null;
}

export interface ApiError {
  error: { code: string; message: string };
}
