// Application state and transitions. Views are pure functions of the API
// responses plus this state; reloading reconstructs everything from the run
// report and the session ledger.

import type { ApiClient } from "./api.js";
import { ApiError } from "./api.js";
import type { CandidateRow, TableState } from "./table.js";
import { buildRows, ledgerRow } from "./table.js";
import type { CandidatesPayload, EvaluateResponse, GalleryView, RunSummary } from "./types.js";

export interface AppState {
  runs: RunSummary[];
  currentRun: string | null;
  payload: CandidatesPayload | null;
  rows: CandidateRow[];
  table: TableState;
  galleryItems: string[];
  gallery: GalleryView | null;
  galleryMissing: string | null;
  error: string | null;
  busy: boolean;
}

export function initialState(): AppState {
  return {
    runs: [],
    currentRun: null,
    payload: null,
    rows: [],
    table: { sortKey: "cace", descending: true, diFilter: null, selection: [] },
    galleryItems: [],
    gallery: null,
    galleryMissing: null,
    error: null,
    busy: false,
  };
}

export function loadCandidates(state: AppState, payload: CandidatesPayload): AppState {
  const rankingKey = payload.ranking_key === "pns" ? "pns_y1" : "cace";
  return {
    ...state,
    payload,
    rows: buildRows(payload),
    table: { ...state.table, sortKey: rankingKey as TableState["sortKey"], descending: true },
    error: null,
  };
}

export function toggleSelection(state: AppState, concept: string): AppState {
  const selection = state.table.selection.includes(concept)
    ? state.table.selection.filter((c) => c !== concept)
    : [...state.table.selection, concept];
  return { ...state, table: { ...state.table, selection } };
}

export function setSort(state: AppState, key: TableState["sortKey"]): AppState {
  const descending = state.table.sortKey === key ? !state.table.descending : true;
  return { ...state, table: { ...state.table, sortKey: key, descending } };
}

export function setDiFilter(state: AppState, threshold: number | null): AppState {
  return { ...state, table: { ...state.table, diFilter: threshold } };
}

export function mergeEvaluation(state: AppState, entry: EvaluateResponse): AppState {
  // resubmitting an identical combination reuses the ledger entry: never a
  // duplicate row
  if (state.rows.some((r) => r.entry_id === entry.entry_id)) {
    return { ...state, error: null };
  }
  return {
    ...state,
    rows: [...state.rows, ledgerRow(entry)],
    table: { ...state.table, selection: [] },
    error: null,
  };
}

export function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return err.detail ? `${err.message} (${err.detail})` : err.message;
  }
  return err instanceof Error ? err.message : String(err);
}

/** Serializes evaluations: one in flight, the rest queued in order. */
export class EvaluationQueue {
  private api: ApiClient;
  private inFlight = false;
  private waiting: Array<() => void> = [];

  constructor(api: ApiClient) {
    this.api = api;
  }

  get pending(): number {
    return this.waiting.length + (this.inFlight ? 1 : 0);
  }

  async submit(run: string, concepts: string[]): Promise<EvaluateResponse> {
    while (this.inFlight) {
      await new Promise<void>((resolve) => this.waiting.push(resolve));
    }
    this.inFlight = true;
    try {
      return await this.api.evaluate(run, concepts);
    } finally {
      this.inFlight = false;
      const next = this.waiting.shift();
      if (next) next();
    }
  }
}
