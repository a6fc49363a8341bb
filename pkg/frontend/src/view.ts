// Pure rendering: each server reply maps to one HTML bubble. No decisions
// are made here beyond presentation; buttons carry the literal chat strings
// ("yes", "new", algorithm names) in data-send attributes.

import type { Reply } from "./api.js";

export interface UiMessage {
  role: "user" | "system";
  kind: string;
  html: string;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const METRIC_LABELS: Record<string, string> = {
  mse: "Mean Squared Error (MSE)",
  r2: "R² Score",
  accuracy: "Accuracy",
  precision: "Precision",
  recall: "Recall",
};

function metricsList(metrics: Record<string, number> | undefined): string {
  if (!metrics) return "";
  const items = Object.entries(metrics)
    .map(
      ([key, value]) =>
        `<li>${escapeHtml(METRIC_LABELS[key] ?? key)}: ${escapeHtml(String(value))}</li>`,
    )
    .join("");
  return `<ul class="metrics">${items}</ul>`;
}

export function renderUserMessage(text: string): UiMessage {
  return { role: "user", kind: "user", html: `<p>${escapeHtml(text)}</p>` };
}

export function renderReply(reply: Reply): UiMessage {
  const payload = (reply.payload ?? {}) as Record<string, unknown>;
  let html: string;
  switch (reply.kind) {
    case "candidate_card": {
      html =
        `<div class="card">` +
        `<h3>${escapeHtml(String(payload.model ?? ""))}</h3>` +
        `<p>Dataset: ${escapeHtml(String(payload.dataset ?? ""))}</p>` +
        `<p>Algorithm: ${escapeHtml(String(payload.algorithm ?? ""))}</p>` +
        metricsList(payload.metrics as Record<string, number> | undefined) +
        `<div class="actions">` +
        `<button type="button" data-send="yes">Confirm</button>` +
        `<button type="button" data-send="new">Train new model</button>` +
        `</div></div>`;
      break;
    }
    case "train_offer": {
      html =
        `<p>${escapeHtml(reply.text)}</p>` +
        `<div class="actions"><button type="button" data-send="new">Train</button></div>`;
      break;
    }
    case "algorithm_menu": {
      const algorithms = (payload.algorithms as string[]) ?? [];
      const fallback = algorithms.length > 0 ? algorithms[0] : "";
      const defaultAlgorithm = String(payload.default ?? fallback);
      const options = algorithms
        .map(
          (name) =>
            `<option value="${escapeHtml(name)}"${name === defaultAlgorithm ? " selected" : ""}>` +
            `${escapeHtml(name)}${name === defaultAlgorithm ? " (default)" : ""}</option>`,
        )
        .join("");
      html =
        `<p>${escapeHtml(reply.text)}</p>` +
        `<div class="actions">` +
        `<label>Algorithm <select data-algorithm-menu>${options}</select></label>` +
        `<button type="button" data-send-selected>Train</button>` +
        `</div>`;
      break;
    }
    case "answer": {
      const value =
        payload.prediction !== undefined
          ? String(payload.prediction)
          : formatRecommendations(payload.recommendations);
      html =
        `<div class="answer"><strong class="value">${escapeHtml(value)}</strong>` +
        `<p>${escapeHtml(reply.text)}</p></div>`;
      break;
    }
    case "error": {
      html = `<p class="error">${escapeHtml(reply.text)}</p>`;
      break;
    }
    default:
      html = `<p>${escapeHtml(reply.text)}</p>`;
  }
  return { role: "system", kind: reply.kind, html };
}

function formatRecommendations(raw: unknown): string {
  if (!Array.isArray(raw)) return "";
  return raw.map((pair) => (Array.isArray(pair) ? String(pair[0]) : String(pair))).join(", ");
}

export function renderInlineError(message: string): UiMessage {
  return { role: "system", kind: "error", html: `<p class="error">${escapeHtml(message)}</p>` };
}
