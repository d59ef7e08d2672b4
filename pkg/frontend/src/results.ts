// Result pane rendering: binary verdict, per-sublabel scores with the
// active ones highlighted, token attribution bars and the meme heatmap.

import type { ExplainResult, Prediction } from "./types.js";

export const ACTIVE_THRESHOLD = 0.5;

export function esc(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function confidenceLabel(value: number): string {
  return value.toFixed(4);
}

export function renderPrediction(root: HTMLElement, prediction: Prediction): void {
  const rows = Object.entries(prediction.sublabel_scores)
    .map(([label, score]) => {
      const active = prediction.active_sublabels.includes(label);
      const pct = Math.round(score * 100);
      return `
        <div class="sublabel${active ? " active" : ""}" data-label="${esc(label)}">
          <span class="name">${esc(label)}</span>
          <span class="bar"><span class="fill" style="width:${pct}%"></span></span>
          <span class="score">${confidenceLabel(score)}</span>
        </div>`;
    })
    .join("");
  const ocr =
    prediction.ocr != null
      ? `<p class="ocr">OCR (${esc(prediction.ocr.engine_id)}): <q>${esc(prediction.ocr.raw_text)}</q></p>`
      : "";
  root.innerHTML = `
    <div class="verdict ${esc(prediction.binary_label)}">
      <strong>${esc(prediction.binary_label)}</strong>
      <span class="confidence">${confidenceLabel(prediction.binary_confidence)}</span>
      <span class="model">${esc(prediction.model_id)}</span>
      ${prediction.truncated ? '<span class="truncated">input truncated</span>' : ""}
    </div>
    ${ocr}
    <div class="sublabels">${rows}</div>`;
}

export function renderExplanation(
  root: HTMLElement,
  result: ExplainResult,
  artifactUrl: (path: string) => string = (p) => p,
): void {
  const parts: string[] = [];
  const report = result.attribution_report;
  if (report) {
    const peak = Math.max(...report.tokens.map((t) => Math.abs(t.weight)), 0);
    const bars = report.tokens
      .map((token) => {
        const magnitude = peak > 0 ? Math.abs(token.weight) / peak : 0;
        const half = (magnitude * 50).toFixed(1);
        const side = token.weight >= 0 ? "pos" : "neg";
        const style =
          token.weight >= 0
            ? `left:50%;width:${half}%`
            : `left:${(50 - parseFloat(half)).toFixed(1)}%;width:${half}%`;
        return `
          <div class="token-row" data-surface="${esc(token.surface)}" data-weight="${token.weight}">
            <span class="token">${esc(token.surface)}</span>
            <span class="axis"><span class="bar ${side}" style="${style}"></span></span>
            <span class="weight">${token.weight.toFixed(4)}</span>
          </div>`;
      })
      .join("");
    parts.push(`
      <div class="attribution" data-method="${esc(report.method)}" data-seed="${report.seed}">
        <h3>Token attribution (${esc(report.method)})</h3>
        ${bars}
      </div>`);
  }
  if (result.artifact_url) {
    parts.push(`
      <figure class="heatmap">
        <img src="${esc(artifactUrl(result.artifact_url))}" alt="saliency heatmap overlay" />
        <figcaption>Region saliency (${esc(result.saliency_map?.method ?? "")})</figcaption>
      </figure>`);
  }
  root.innerHTML = parts.join("\n");
}

export function renderErrorBanner(root: HTMLElement, code: string, message: string): void {
  const banner = root.ownerDocument.createElement("div");
  banner.className = "error-banner";
  banner.setAttribute("role", "alert");
  banner.textContent = `${code}: ${message}`;
  root.prepend(banner);
}

export function renderJobSpinner(root: HTMLElement, status: string): void {
  root.innerHTML = `<div class="spinner" data-status="${esc(status)}">explanation ${esc(status)}…</div>`;
}
