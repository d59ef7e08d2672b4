// Scripted stand-in for the moderation service, implementing the same
// endpoints and error codes the real API documents.

import type { FetchLike } from "../src/client.js";
import type { ExplainJob, Prediction, RegistryEntry } from "../src/types.js";

export const STUB_MODELS: RegistryEntry[] = [
  { model_id: "mbert", modality: "text", checkpoint: "stub", metrics: {} },
  { model_id: "xlmr", modality: "text", checkpoint: "stub", metrics: {} },
  { model_id: "mbert_resnet", modality: "meme", checkpoint: "stub", metrics: {} },
  { model_id: "mbert_efficientnet", modality: "meme", checkpoint: "stub", metrics: {} },
];

const LEXICON: Record<string, number> = { aunt: 0.25, sagging: 0.2, dahej: 0.15 };

function predictionFor(modelId: string, text: string): Prediction {
  const bump = text
    .toLowerCase()
    .split(/\s+/)
    .reduce((acc, w) => acc + (LEXICON[w] ?? 0), 0);
  const confidence = Math.min(1, 0.5206 + bump);
  const scores = {
    derogatory_language: Math.min(1, 0.4665 + bump * 2),
    objectification_dehumanization: Math.min(1, 0.481 + bump * 2),
    threats_violence: Math.min(1, 0.0263 + bump * 2),
    body_shaming: 0.11,
  };
  return {
    binary_label: confidence >= 0.5 ? "misogynistic" : "non_offensive",
    binary_confidence: confidence,
    sublabel_scores: scores,
    active_sublabels: Object.entries(scores)
      .filter(([, v]) => v >= 0.5)
      .map(([k]) => k),
    model_id: modelId,
    truncated: false,
  };
}

function json(payload: unknown, status = 200): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => payload,
  } as unknown as Response;
}

export interface StubState {
  feedbackBodies: unknown[];
  rationaleBodies: unknown[];
  explainRequests: unknown[];
  pollsUntilDone: number;
}

export function makeStubFetch(state: StubState): FetchLike {
  let jobCounter = 0;
  const jobs = new Map<string, { request: any; polls: number }>();

  return async (input: string, init?: RequestInit) => {
    const url = new URL(input, "http://stub.local");
    const path = url.pathname;
    const body = init?.body && typeof init.body === "string" ? JSON.parse(init.body) : null;

    if (path === "/models") {
      return json({ models: STUB_MODELS });
    }
    if (path === "/predict/text") {
      if (!body?.text?.trim()) {
        return json({ error: { code: "empty_text", message: "text is empty" } }, 422);
      }
      const known = STUB_MODELS.some((m) => m.model_id === body.model_id);
      if (!known) {
        return json({ error: { code: "model_unknown", message: "no such model" } }, 400);
      }
      return json(predictionFor(body.model_id, body.text));
    }
    if (path === "/explain" && init?.method === "POST") {
      state.explainRequests.push(body);
      const jobId = `job${++jobCounter}`;
      jobs.set(jobId, { request: body, polls: 0 });
      const job: ExplainJob = {
        job_id: jobId,
        status: "queued",
        submitted_at: new Date().toISOString(),
        seed: body.seed ?? 7,
        result: null,
        error: null,
      };
      return json(job, 202);
    }
    const jobMatch = path.match(/^\/explain\/(.+)$/);
    if (jobMatch) {
      const job = jobs.get(jobMatch[1]);
      if (!job) return json({ error: { code: "job_unknown", message: "no job" } }, 404);
      job.polls += 1;
      if (job.polls < state.pollsUntilDone) {
        return json({
          job_id: jobMatch[1],
          status: job.polls === 1 ? "queued" : "running",
          submitted_at: "t",
          seed: job.request.seed ?? 7,
          result: null,
          error: null,
        });
      }
      const words: string[] = (job.request.text ?? "").split(/\s+/).filter(Boolean);
      let cursor = 0;
      const tokens = words.map((w) => {
        const start = (job.request.text as string).indexOf(w, cursor);
        cursor = start + w.length;
        return {
          surface: w,
          char_start: start,
          char_end: start + w.length,
          weight: LEXICON[w.toLowerCase()] ?? -0.01,
        };
      });
      return json({
        job_id: jobMatch[1],
        status: "done",
        submitted_at: "t",
        seed: job.request.seed ?? 7,
        result: {
          attribution_report: {
            method: job.request.xai_method,
            target: "binary_positive",
            tokens,
            base_value: 0.5206,
            n_perturbations: 32,
            seed: job.request.seed ?? 7,
            fidelity_r2: 1.0,
          },
        },
        error: null,
      });
    }
    if (path === "/rationale") {
      state.rationaleBodies.push(body);
      return json({ id: state.rationaleBodies.length }, 201);
    }
    if (path === "/feedback") {
      const answers = Object.values(body?.answers ?? {});
      if (answers.some((v) => typeof v !== "number" || v < 1 || v > 5)) {
        return json({ error: { code: "validation_error", message: "Likert out of range" } }, 422);
      }
      if (body.kind === "explanation" && !body.xai_method) {
        return json({ error: { code: "validation_error", message: "xai_method required" } }, 422);
      }
      state.feedbackBodies.push(body);
      return json({ id: state.feedbackBodies.length }, 201);
    }
    return json({ error: { code: "not_found", message: path } }, 404);
  };
}

export function newStubState(pollsUntilDone = 3): StubState {
  return { feedbackBodies: [], rationaleBodies: [], explainRequests: [], pollsUntilDone };
}
