// Per-tab session state. The token is random, never derived from user
// data; the selected model's modality is kept consistent with the
// active tab by construction (the modality guard).

import type { ExplainJob, Modality, Prediction, RegistryEntry, XaiMethod } from "./types.js";

export interface UiSession {
  sessionToken: string;
  activeTab: Modality;
  selectedModel: string | null;
  selectedXai: XaiMethod | null;
  lastPrediction: Prediction | null;
  lastPredictionText: string | null;
  lastExplanationJob: ExplainJob | null;
}

export function randomToken(): string {
  const bytes = new Uint8Array(16);
  crypto.getRandomValues(bytes);
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

export function newSession(activeTab: Modality = "text"): UiSession {
  return {
    sessionToken: randomToken(),
    activeTab,
    selectedModel: null,
    selectedXai: null,
    lastPrediction: null,
    lastPredictionText: null,
    lastExplanationJob: null,
  };
}

export function modelsForTab(models: RegistryEntry[], tab: Modality): RegistryEntry[] {
  return models.filter((m) => m.modality === tab);
}

export function switchTab(session: UiSession, models: RegistryEntry[], tab: Modality): UiSession {
  if (tab === session.activeTab) return session;
  const candidates = modelsForTab(models, tab);
  return {
    ...session,
    activeTab: tab,
    // guard: never carry a model of the wrong modality across tabs
    selectedModel: candidates.some((m) => m.model_id === session.selectedModel)
      ? session.selectedModel
      : (candidates[0]?.model_id ?? null),
    lastPrediction: null,
    lastPredictionText: null,
    lastExplanationJob: null,
  };
}

export function selectModel(
  session: UiSession,
  models: RegistryEntry[],
  modelId: string,
): UiSession {
  const entry = models.find((m) => m.model_id === modelId);
  if (!entry || entry.modality !== session.activeTab) {
    throw new Error(`model ${modelId} does not serve the ${session.activeTab} tab`);
  }
  return { ...session, selectedModel: modelId };
}

export function recordPrediction(
  session: UiSession,
  text: string | null,
  prediction: Prediction,
): UiSession {
  return {
    ...session,
    lastPrediction: prediction,
    lastPredictionText: text,
    lastExplanationJob: null,
  };
}

export function recordExplanation(session: UiSession, job: ExplainJob): UiSession {
  return { ...session, lastExplanationJob: job };
}

export function explanationDisplayed(session: UiSession): boolean {
  return session.lastExplanationJob?.status === "done";
}
