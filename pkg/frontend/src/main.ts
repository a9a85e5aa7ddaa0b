// Bootstrap and event wiring. One delegated listener per section; every
// interaction produces a new state and a full re-render from it.

import { ApiClient } from "./api.js";
import { buildEvaluationRequest, renderCombineBar } from "./combine.js";
import { renderGallery, renderGalleryPicker } from "./gallery.js";
import {
  AppState,
  describeError,
  EvaluationQueue,
  initialState,
  loadCandidates,
  mergeEvaluation,
  setDiFilter,
  setSort,
  toggleSelection,
} from "./state.js";
import { renderTable, SortKey } from "./table.js";
import { escapeHtml } from "./table.js";

const API_BASE = (window as unknown as { RULELENS_API?: string }).RULELENS_API ?? "";

const api = new ApiClient(API_BASE);
const queue = new EvaluationQueue(api);
let state: AppState = initialState();

function app(): HTMLElement {
  const el = document.getElementById("app");
  if (!el) throw new Error("missing #app container");
  return el;
}

function render(): void {
  const runOptions = state.runs
    .map(
      (r) =>
        `<option value="${escapeHtml(r.run)}"${r.run === state.currentRun ? " selected" : ""}>` +
        `${escapeHtml(r.run)} — ${escapeHtml(r.base_rule)}</option>`,
    )
    .join("");
  const threshold = state.payload?.di_threshold ?? 0.15;
  const filterOn = state.table.diFilter !== null;
  app().innerHTML = `
    <header>
      <h1>explanation explorer</h1>
      <label>run <select data-action="pick-run">${runOptions}</select></label>
      <label class="filter">
        <input type="checkbox" data-action="di-filter" ${filterOn ? "checked" : ""}>
        hide DI &lt; ${threshold}
      </label>
    </header>
    <section id="combine">${renderCombineBar(state.table.selection, state.error, state.busy)}</section>
    <section id="table">${renderTable(state.rows, state.table)}</section>
    <section id="gallery-section">
      <h2>gallery</h2>
      ${renderGalleryPicker(state.galleryItems, state.gallery?.id ?? null)}
      ${renderGallery(state.gallery, state.galleryMissing)}
    </section>`;
}

async function selectRun(run: string): Promise<void> {
  state = { ...state, currentRun: run, gallery: null, galleryMissing: null };
  try {
    const payload = await api.getCandidates(run);
    state = loadCandidates(state, payload);
    const report = (await api.getRun(run)) as {
      gallery?: { pairs: Array<{ id: string }>; interventions: Array<{ id: string }> };
    };
    const gallery = report.gallery ?? { pairs: [], interventions: [] };
    state = {
      ...state,
      galleryItems: [...gallery.pairs.map((p) => p.id), ...gallery.interventions.map((i) => i.id)],
    };
  } catch (err) {
    state = { ...state, error: describeError(err) };
  }
  render();
}

async function evaluateSelection(): Promise<void> {
  let concepts: string[];
  try {
    concepts = buildEvaluationRequest(state.table.selection);
  } catch (err) {
    state = { ...state, error: describeError(err) };
    render();
    return;
  }
  const run = state.currentRun;
  if (!run) return;
  state = { ...state, busy: true };
  render();
  try {
    const entry = await queue.submit(run, concepts);
    state = mergeEvaluation({ ...state, busy: false }, entry);
  } catch (err) {
    state = { ...state, busy: false, error: describeError(err) };
  }
  render();
}

async function openGallery(itemId: string): Promise<void> {
  if (!state.currentRun || !itemId) {
    state = { ...state, gallery: null, galleryMissing: null };
    render();
    return;
  }
  try {
    const view = await api.getGallery(state.currentRun, itemId);
    state = { ...state, gallery: view, galleryMissing: null };
  } catch {
    state = { ...state, gallery: null, galleryMissing: itemId };
  }
  render();
}

function wireEvents(): void {
  app().addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const action = target.dataset.action;
    if (action === "sort") {
      state = setSort(state, target.dataset.key as SortKey);
      render();
    } else if (action === "select") {
      state = toggleSelection(state, target.dataset.concept ?? "");
      render();
    } else if (action === "evaluate") {
      void evaluateSelection();
    }
  });
  app().addEventListener("change", (event) => {
    const target = event.target as HTMLSelectElement | HTMLInputElement;
    const action = target.dataset.action;
    if (action === "pick-run") {
      void selectRun((target as HTMLSelectElement).value);
    } else if (action === "pick-gallery") {
      void openGallery((target as HTMLSelectElement).value);
    } else if (action === "di-filter") {
      const threshold = (target as HTMLInputElement).checked
        ? (state.payload?.di_threshold ?? 0.15)
        : null;
      state = setDiFilter(state, threshold);
      render();
    }
  });
}

async function bootstrap(): Promise<void> {
  wireEvents();
  try {
    state = { ...state, runs: await api.listRuns() };
  } catch (err) {
    state = { ...state, error: describeError(err) };
    render();
    return;
  }
  const latest = state.runs[state.runs.length - 1];
  if (latest) {
    await selectRun(latest.run);
  } else {
    render();
  }
}

void bootstrap();
