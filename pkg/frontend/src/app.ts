// Page wiring for the two-section workbench: pick a model, submit text
// or a meme, read the prediction, request a LIME/Kernel-SHAP
// explanation, highlight rationale spans and send the feedback forms.

import { ApiClient, ApiRequestError, type ExplainRequest } from "./client.js";
import { buildFeedbackBody, FormValidationError, formEnabled, questionsFor } from "./forms.js";
import { pollJob, SingleFlight, type Sleeper } from "./polling.js";
import { buildRationaleBody, mergeSpans, selectionToSpans, type Span } from "./rationale.js";
import {
  modelsForTab,
  newSession,
  recordExplanation,
  recordPrediction,
  selectModel,
  switchTab,
  type UiSession,
} from "./session.js";
import {
  renderErrorBanner,
  renderExplanation,
  renderJobSpinner,
  renderPrediction,
} from "./results.js";
import type { FeedbackKind, Modality, RegistryEntry, XaiMethod } from "./types.js";

export interface AppHandle {
  session: () => UiSession;
  /** resolves when the most recent user action finished its network work */
  idle: () => Promise<void>;
  root: HTMLElement;
}

const PAGE = `
  <nav class="tabs">
    <button data-tab="text" class="tab active">Text</button>
    <button data-tab="meme" class="tab">Meme</button>
  </nav>
  <section class="controls">
    <label>Model <select id="model-select"></select></label>
    <label>XAI <select id="xai-select">
      <option value="lime">lime</option>
      <option value="kernel_shap">kernel_shap</option>
    </select></label>
    <textarea id="text-input" rows="3" placeholder="Paste a comment…"></textarea>
    <input type="file" id="image-input" accept="image/png,image/jpeg" hidden />
    <input type="text" id="text-override" placeholder="Optional OCR override" hidden />
    <button id="analyze">Analyze</button>
    <button id="explain" disabled>Explain</button>
  </section>
  <section id="banners"></section>
  <section id="prediction-pane"></section>
  <section id="rationale-pane" hidden>
    <h3>Highlight rationale</h3>
    <div id="prediction-text"></div>
    <label><input type="checkbox" id="snap-toggle" /> snap to words</label>
    <button id="add-selection">Add selection</button>
    <span id="span-count">0 spans</span>
    <button id="submit-rationale">Submit rationale</button>
  </section>
  <section id="explanation-pane"></section>
  <section id="feedback-pane"></section>
`;

function likertForm(kind: FeedbackKind, doc: Document): HTMLFormElement {
  const form = doc.createElement("form");
  form.id = `form-${kind}`;
  form.dataset.kind = kind;
  const title = kind === "prediction" ? "Prediction feedback" : "Explanation feedback";
  const rows = questionsFor(kind)
    .map(
      (q) => `
      <fieldset data-question="${q.id}">
        <legend>${q.prompt}</legend>
        ${[1, 2, 3, 4, 5]
          .map(
            (v) =>
              `<label><input type="radio" name="${q.id}" value="${v}" />${v}</label>`,
          )
          .join("")}
      </fieldset>`,
    )
    .join("");
  form.innerHTML = `<h3>${title}</h3>${rows}
    <textarea name="free_text" placeholder="Anything else?"></textarea>
    <button type="submit">Send ${kind} feedback</button>`;
  return form;
}

export function mountApp(
  root: HTMLElement,
  client: ApiClient,
  options: { sleep?: Sleeper } = {},
): AppHandle {
  const doc = root.ownerDocument;
  root.innerHTML = PAGE;

  let session = newSession("text");
  let models: RegistryEntry[] = [];
  let pendingSpans: Span[] = [];
  let lastImage: { blob: Blob; b64: string } | null = null;
  let pending: Promise<void> = Promise.resolve();
  const explainFlight = new SingleFlight();

  const el = <T extends HTMLElement>(selector: string) => root.querySelector(selector) as T;
  const banners = el<HTMLElement>("#banners");
  const predictionPane = el<HTMLElement>("#prediction-pane");
  const explanationPane = el<HTMLElement>("#explanation-pane");
  const rationalePane = el<HTMLElement>("#rationale-pane");
  const predictionText = el<HTMLElement>("#prediction-text");
  const feedbackPane = el<HTMLElement>("#feedback-pane");
  const modelSelect = el<HTMLSelectElement>("#model-select");
  const xaiSelect = el<HTMLSelectElement>("#xai-select");
  const textInput = el<HTMLTextAreaElement>("#text-input");
  const imageInput = el<HTMLInputElement>("#image-input");
  const textOverride = el<HTMLInputElement>("#text-override");
  const explainButton = el<HTMLButtonElement>("#explain");

  const predictionForm = likertForm("prediction", doc);
  const explanationForm = likertForm("explanation", doc);
  feedbackPane.append(predictionForm, explanationForm);

  function showError(error: unknown) {
    if (error instanceof ApiRequestError) {
      renderErrorBanner(banners, error.code, error.message);
    } else if (error instanceof FormValidationError) {
      renderErrorBanner(banners, "form_invalid", `${error.field}: ${error.message}`);
      root
        .querySelector(`fieldset[data-question="${error.field}"]`)
        ?.classList.add("invalid");
    } else {
      renderErrorBanner(banners, "unexpected", String(error));
    }
  }

  function refreshControls() {
    const candidates = modelsForTab(models, session.activeTab);
    modelSelect.innerHTML = candidates
      .map((m) => `<option value="${m.model_id}">${m.model_id}</option>`)
      .join("");
    if (session.selectedModel) modelSelect.value = session.selectedModel;
    const isText = session.activeTab === "text";
    textInput.hidden = !isText;
    imageInput.hidden = isText;
    textOverride.hidden = isText;
    const formsOn = {
      prediction: formEnabled("prediction", session),
      explanation: formEnabled("explanation", session),
    };
    predictionForm.querySelector("button")!.toggleAttribute("disabled", !formsOn.prediction);
    explanationForm.querySelector("button")!.toggleAttribute("disabled", !formsOn.explanation);
    explainButton.disabled = session.lastPrediction === null;
    rationalePane.hidden = !(isText && session.lastPrediction !== null);
  }

  async function loadModels() {
    models = await client.models();
    const first = modelsForTab(models, session.activeTab)[0];
    if (first) session = selectModel(session, models, first.model_id);
    refreshControls();
  }

  async function analyze() {
    banners.innerHTML = "";
    const modelId = modelSelect.value;
    session = selectModel(session, models, modelId);
    if (session.activeTab === "text") {
      const text = textInput.value;
      const prediction = await client.predictText(modelId, text);
      session = recordPrediction(session, text, prediction);
      predictionText.textContent = text;
    } else {
      const file = imageInput.files?.[0];
      if (!file) throw new ApiRequestError(0, "no_image", "choose an image first");
      const buffer = new Uint8Array(await file.arrayBuffer());
      let binary = "";
      buffer.forEach((b) => (binary += String.fromCharCode(b)));
      lastImage = { blob: file, b64: btoa(binary) };
      const override = textOverride.value || undefined;
      const prediction = await client.predictMeme(modelId, file, override);
      session = recordPrediction(session, override ?? prediction.ocr?.raw_text ?? null, prediction);
    }
    pendingSpans = [];
    el<HTMLElement>("#span-count").textContent = "0 spans";
    renderPrediction(predictionPane, session.lastPrediction!);
    explanationPane.innerHTML = "";
    refreshControls();
  }

  async function explain() {
    const prediction = session.lastPrediction;
    if (!prediction) return;
    banners.innerHTML = "";
    const method = xaiSelect.value as XaiMethod;
    session = { ...session, selectedXai: method };
    const request: ExplainRequest = {
      modality: session.activeTab,
      model_id: prediction.model_id,
      xai_method: method,
    };
    if (session.activeTab === "text") {
      request.text = session.lastPredictionText ?? "";
    } else {
      if (!lastImage) return;
      request.image_b64 = lastImage.b64;
      if (session.lastPredictionText) request.text = session.lastPredictionText;
    }
    const finished = await explainFlight.run(async () => {
      const submitted = await client.submitExplain(request);
      renderJobSpinner(explanationPane, submitted.status);
      return pollJob(client, submitted.job_id, {
        sleep: options.sleep,
        onUpdate: (job) => {
          if (job.status !== "done") renderJobSpinner(explanationPane, job.status);
        },
      });
    });
    if (finished === null) return; // superseded by a newer request
    if (finished.status === "failed") {
      renderErrorBanner(banners, "explain_failed", finished.error ?? "job failed");
      explanationPane.innerHTML = "";
      return;
    }
    session = recordExplanation(session, finished);
    renderExplanation(explanationPane, finished.result!, (p) => client.artifactUrl(p));
    refreshControls();
  }

  async function submitRationale() {
    if (!session.lastPredictionText) return;
    const snap = el<HTMLInputElement>("#snap-toggle").checked;
    const body = buildRationaleBody(
      session.lastPredictionText,
      pendingSpans,
      session.sessionToken,
      { snap },
    );
    await client.submitRationale(body);
    pendingSpans = [];
    el<HTMLElement>("#span-count").textContent = "0 spans (sent)";
  }

  async function submitFeedback(kind: FeedbackKind, form: HTMLFormElement) {
    banners.innerHTML = "";
    form.querySelectorAll("fieldset").forEach((f) => f.classList.remove("invalid"));
    const answers: Record<string, number | null> = {};
    for (const question of questionsFor(kind)) {
      const checked = form.querySelector<HTMLInputElement>(
        `input[name="${question.id}"]:checked`,
      );
      answers[question.id] = checked ? Number(checked.value) : null;
    }
    const freeText = form.querySelector<HTMLTextAreaElement>("textarea")!.value;
    const body = buildFeedbackBody(kind, answers, session, freeText);
    await client.submitFeedback(body);
    form.dataset.submitted = "true";
  }

  function track(work: () => Promise<void>) {
    pending = work().catch(showError);
  }

  root.querySelectorAll<HTMLButtonElement>(".tab").forEach((button) => {
    button.addEventListener("click", () => {
      root.querySelectorAll(".tab").forEach((b) => b.classList.remove("active"));
      button.classList.add("active");
      session = switchTab(session, models, button.dataset.tab as Modality);
      predictionPane.innerHTML = "";
      explanationPane.innerHTML = "";
      refreshControls();
    });
  });
  modelSelect.addEventListener("change", () => {
    session = selectModel(session, models, modelSelect.value);
  });
  el<HTMLButtonElement>("#analyze").addEventListener("click", () => track(analyze));
  explainButton.addEventListener("click", () => track(explain));
  el<HTMLButtonElement>("#add-selection").addEventListener("click", () => {
    const selection = doc.defaultView?.getSelection();
    if (!selection) return;
    pendingSpans = mergeSpans([...pendingSpans, ...selectionToSpans(predictionText, selection)]);
    el<HTMLElement>("#span-count").textContent = `${pendingSpans.length} spans`;
  });
  el<HTMLButtonElement>("#submit-rationale").addEventListener("click", () =>
    track(submitRationale),
  );
  for (const [kind, form] of [
    ["prediction", predictionForm],
    ["explanation", explanationForm],
  ] as const) {
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      track(() => submitFeedback(kind, form));
    });
  }

  track(loadModels);
  return { session: () => session, idle: () => pending, root };
}
