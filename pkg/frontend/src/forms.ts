// The two feedback forms. Client-side validation mirrors the server's
// rules (Likert 1..5, explanation feedback requires the XAI method); the
// explanation form stays disabled until an explanation is displayed.

import { contentHash } from "./rationale.js";
import { explanationDisplayed, type UiSession } from "./session.js";
import type { FeedbackBody, FeedbackKind } from "./types.js";

export interface FormQuestion {
  id: string;
  prompt: string;
}

// Mirrors the server's placeholder question sets
// (src/misodetect/feedback_forms/*.json); stand-in wording, not a
// validated instrument.
export const PREDICTION_QUESTIONS: FormQuestion[] = [
  { id: "pred_agree_binary", prompt: "I agree with the model's binary decision for this input." },
  { id: "pred_confidence_plausible", prompt: "The reported confidence matches my own certainty about the decision." },
  { id: "pred_sublabels_appropriate", prompt: "The fine-grained categories assigned to this input are appropriate." },
  { id: "pred_would_act", prompt: "As a moderator I could act on this prediction without further review." },
];

export const EXPLANATION_QUESTIONS: FormQuestion[] = [
  { id: "xai_highlights_relevant", prompt: "The highlighted words or regions are relevant to the decision." },
  { id: "xai_understandable", prompt: "The explanation helped me understand why the model decided this way." },
  { id: "xai_complete", prompt: "Nothing important for the decision seems to be missing from the explanation." },
  { id: "xai_trust", prompt: "The explanation increases my trust in this prediction." },
];

export class FormValidationError extends Error {
  constructor(
    public field: string,
    message: string,
  ) {
    super(message);
  }
}

export function formEnabled(kind: FeedbackKind, session: UiSession): boolean {
  if (session.lastPrediction === null) return false;
  if (kind === "explanation") return explanationDisplayed(session);
  return true;
}

export function questionsFor(kind: FeedbackKind): FormQuestion[] {
  return kind === "prediction" ? PREDICTION_QUESTIONS : EXPLANATION_QUESTIONS;
}

/** Validate raw form state and assemble the POST body. kind-specific
 * fields (model, xai method, sample reference) are auto-filled from the
 * session, matching what the result pane showed. */
export function buildFeedbackBody(
  kind: FeedbackKind,
  answers: Record<string, number | null | undefined>,
  session: UiSession,
  freeText?: string,
): FeedbackBody {
  if (!formEnabled(kind, session)) {
    throw new FormValidationError("form", `${kind} feedback is not available yet`);
  }
  const prediction = session.lastPrediction!;
  const validated: Record<string, number> = {};
  for (const question of questionsFor(kind)) {
    const value = answers[question.id];
    if (value === null || value === undefined) {
      throw new FormValidationError(question.id, "please answer every question");
    }
    if (!Number.isInteger(value) || value < 1 || value > 5) {
      throw new FormValidationError(question.id, "answers must be whole numbers from 1 to 5");
    }
    validated[question.id] = value;
  }
  const body: FeedbackBody = {
    kind,
    sample_ref: session.lastPredictionText
      ? contentHash(session.lastPredictionText)
      : `model:${prediction.model_id}`,
    model_id: prediction.model_id,
    answers: validated,
  };
  if (kind === "explanation") {
    const method = session.lastExplanationJob?.result?.attribution_report?.method
      ?? session.lastExplanationJob?.result?.saliency_map?.method
      ?? session.selectedXai;
    if (!method) {
      throw new FormValidationError("xai_method", "no explanation method on record");
    }
    body.xai_method = method;
  }
  if (freeText?.trim()) {
    body.free_text = freeText.trim();
  }
  return body;
}
