// Candidate table model: unified rows from the run report and the session
// ledger, stable sorting that mirrors the server's ranking tie-breaks, and
// the DI-threshold filter. Rendering is a pure function of the rows and the
// view state; raw server values ride along in data attributes so nothing is
// ever recomputed client-side.

import type { CandidatesPayload, LedgerEntry, Metrics, RankedRow } from "./types.js";

export interface CandidateRow extends Metrics {
  concept: string;
  target_class: number;
  origin: string;
  entry_id?: string;
}

export type SortKey = "concept" | "di" | "cace" | "pns_y1" | "origin";

export interface TableState {
  sortKey: SortKey;
  descending: boolean;
  diFilter: number | null;
  selection: string[];
}

export function ledgerRow(entry: LedgerEntry): CandidateRow {
  return {
    concept: entry.combined,
    target_class: entry.target_class,
    origin: entry.origin,
    entry_id: entry.entry_id,
    ...entry.metrics,
    di: entry.metrics.di ?? entry.coarse_di,
  };
}

export function buildRows(payload: CandidatesPayload): CandidateRow[] {
  // reload reconstructs exactly what live use built up: report rows first,
  // then every ledger entry in append order
  const rows: CandidateRow[] = payload.ranked.map((r: RankedRow) => ({ ...r }));
  for (const entry of payload.session) {
    rows.push(ledgerRow(entry));
  }
  return rows;
}

const METRIC_TIEBREAK: Record<string, keyof CandidateRow> = {
  cace: "pns_y1",
  pns_y1: "cace",
  di: "cace",
};

function compareValues(a: unknown, b: unknown): number {
  if (typeof a === "number" && typeof b === "number") return a - b;
  if (a === null || a === undefined) return b === null || b === undefined ? 0 : -1;
  if (b === null || b === undefined) return 1;
  return String(a) < String(b) ? -1 : String(a) > String(b) ? 1 : 0;
}

export function sortRows(rows: CandidateRow[], key: SortKey, descending: boolean): CandidateRow[] {
  // decorate with the original index so equal keys keep their order (stable
  // even if the runtime's Array.sort were not)
  const decorated = rows.map((row, index) => ({ row, index }));
  const tiebreak = METRIC_TIEBREAK[key];
  decorated.sort((x, y) => {
    let cmp = compareValues(x.row[key], y.row[key]);
    if (cmp === 0 && tiebreak) {
      cmp = compareValues(x.row[tiebreak], y.row[tiebreak]);
    }
    if (cmp !== 0) return descending ? -cmp : cmp;
    // final tie-break mirrors the server: canonical concept string ascending
    const byConcept = compareValues(x.row.concept, y.row.concept);
    if (byConcept !== 0) return byConcept;
    return x.index - y.index;
  });
  return decorated.map((d) => d.row);
}

export function applyDiFilter(rows: CandidateRow[], threshold: number | null): CandidateRow[] {
  if (threshold === null) return rows;
  return rows.filter((r) => r.di !== null && r.di >= threshold);
}

export function visibleRows(rows: CandidateRow[], state: TableState): CandidateRow[] {
  return sortRows(applyDiFilter(rows, state.diFilter), state.sortKey, state.descending);
}

export function degeneracyBadges(row: CandidateRow): string[] {
  return (row.flags ?? []).filter(
    (f) =>
      f.includes("denominator_zero") ||
      f.includes("di_constant_presence") ||
      f.includes("no_present_scenes") ||
      f.includes("no_absent_scenes"),
  );
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmt(value: number | null | undefined): string {
  if (value === null || value === undefined) return "–";
  return value.toFixed(3);
}

const COLUMNS: Array<{ key: SortKey; label: string }> = [
  { key: "concept", label: "concept" },
  { key: "di", label: "DI" },
  { key: "cace", label: "CaCE" },
  { key: "pns_y1", label: "PNS (y=1)" },
  { key: "origin", label: "origin" },
];

export function renderTable(rows: CandidateRow[], state: TableState): string {
  const shown = visibleRows(rows, state);
  const header = COLUMNS.map((c) => {
    const arrow = state.sortKey === c.key ? (state.descending ? " ▾" : " ▴") : "";
    return `<th data-action="sort" data-key="${c.key}">${c.label}${arrow}</th>`;
  }).join("");
  if (shown.length === 0) {
    return (
      `<table class="candidates"><thead><tr><th></th>${header}</tr></thead>` +
      `<tbody><tr><td class="empty" colspan="6">no candidates to show</td></tr></tbody></table>`
    );
  }
  const body = shown
    .map((row) => {
      const badges = degeneracyBadges(row)
        .map((b) => `<span class="badge" title="${escapeHtml(b)}">⚑</span>`)
        .join("");
      const checked = state.selection.includes(row.concept) ? " checked" : "";
      // raw server values (full precision) ride in data attributes
      return (
        `<tr data-concept="${escapeHtml(row.concept)}"` +
        ` data-di="${row.di ?? ""}" data-cace="${row.cace}" data-pns="${row.pns_y1}">` +
        `<td><input type="checkbox" data-action="select"` +
        ` data-concept="${escapeHtml(row.concept)}"${checked}></td>` +
        `<td class="concept">${escapeHtml(row.concept)}${badges}</td>` +
        `<td class="num">${fmt(row.di)}</td>` +
        `<td class="num">${fmt(row.cace)}</td>` +
        `<td class="num">${fmt(row.pns_y1)}</td>` +
        `<td>${escapeHtml(row.origin)}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="candidates"><thead><tr><th></th>${header}</tr></thead>` +
    `<tbody>${body}</tbody></table>`
  );
}
