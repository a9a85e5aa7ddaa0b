// Combine builder: turn the current selection into an evaluation request and
// render the bar with any inline error (contradictions come back from the
// server as structured 400s; nothing is validated client-side beyond
// non-emptiness, since the server owns the grammar).

import { escapeHtml } from "./table.js";

export function buildEvaluationRequest(selection: string[]): string[] {
  if (selection.length < 1) {
    throw new Error("select at least one concept to evaluate");
  }
  return [...selection];
}

export function renderCombineBar(selection: string[], error: string | null, busy: boolean): string {
  const chips = selection
    .map((c) => `<span class="chip">${escapeHtml(c)}</span>`)
    .join(" ");
  const label = selection.length > 1 ? "combine & evaluate" : "evaluate";
  const button = `<button data-action="evaluate" ${busy || selection.length === 0 ? "disabled" : ""}>${label}</button>`;
  const errorHtml = error ? `<span class="error" role="alert">${escapeHtml(error)}</span>` : "";
  const hint = selection.length === 0 ? '<span class="hint">select rows to combine</span>' : "";
  return `<div class="combine-bar">${chips}${hint}${button}${errorHtml}</div>`;
}
