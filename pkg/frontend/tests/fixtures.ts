// Shared fixtures shaped exactly like the exploration service payloads.

import type {
  CandidatesPayload,
  EvaluateResponse,
  GalleryView,
  LedgerEntry,
  Metrics,
  RankedRow,
} from "../src/types.js";

export function metrics(overrides: Partial<Metrics> = {}): Metrics {
  return {
    di: 0.5,
    cace: 0.5,
    pns_y1: 0.5,
    pns_y0: 0.0,
    pn_y1: 0.5,
    ps_y1: 0.5,
    bound_y1: 0.25,
    counts: { total: 40, present: 20, absent: 20, dropped: 0 },
    flags: [],
    ...overrides,
  };
}

export function rankedRow(concept: string, overrides: Partial<RankedRow> = {}): RankedRow {
  return {
    concept,
    target_class: 1,
    origin: "miner",
    support: { "0to1": 5, "1to0": 5 },
    ...metrics(),
    ...overrides,
  };
}

// server-side ordering: primary metric desc, the other causal metric as the
// tie-break, then the canonical concept string
export const RANKED: RankedRow[] = [
  rankedRow("color=cyan", { di: 1.0, cace: 1.0, pns_y1: 1.0 }),
  rankedRow("color=cyan&material=metal", { di: 0.5, cace: 0.75, pns_y1: 0.75 }),
  rankedRow("color=cyan&shape=sphere", { di: 0.45, cace: 0.7, pns_y1: 0.72 }),
  rankedRow("material=metal", { di: 0.2, cace: 0.7, pns_y1: 0.7 }),
  rankedRow("region=left", { di: 0.16, cace: 0.1, pns_y1: 0.1, flags: ["ps_y1_denominator_zero"] }),
];

export function ledgerEntry(combined: string, overrides: Partial<LedgerEntry> = {}): LedgerEntry {
  return {
    entry_id: `id-${combined}`,
    concepts: combined.split("&"),
    combined,
    target_class: 1,
    origin: "user",
    metrics: metrics({ di: null, cace: 0.9, pns_y1: 0.9 }),
    coarse_di: 0.8,
    ...overrides,
  };
}

export function candidatesPayload(session: LedgerEntry[] = []): CandidatesPayload {
  return {
    ranking_key: "cace",
    di_threshold: 0.15,
    ranked: RANKED,
    coarse: [],
    session,
  };
}

export function evaluateResponse(combined: string, reused = false): EvaluateResponse {
  return { job_id: `id-${combined}`, status: "done", reused, ...ledgerEntry(combined) };
}

export function galleryView(kind: "pairs" | "interventions"): GalleryView {
  const base = {
    id: kind === "pairs" ? "pair-0000" : "intervention-0000",
    before: "gallery/x-before.svg",
    after: "gallery/x-after.svg",
    before_svg: '<svg xmlns="http://www.w3.org/2000/svg"><circle r="4"/></svg>',
    after_svg: '<svg xmlns="http://www.w3.org/2000/svg"><rect width="4" height="4"/></svg>',
    kind,
  };
  if (kind === "pairs") {
    return { ...base, from_label: 1, to_label: 0 };
  }
  return {
    ...base,
    concept: "color=cyan",
    presence: true,
    y_base: 1,
    y_flipped: 0,
    ice: 1,
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
