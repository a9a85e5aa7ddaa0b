// Payload shapes of the exploration service. The UI never computes metrics
// itself; these are the server-owned numbers it displays.

export interface MetricCounts {
  total: number;
  present: number;
  absent: number;
  dropped: number;
}

export interface Metrics {
  di: number | null;
  cace: number;
  pns_y1: number;
  pns_y0: number;
  pn_y1: number;
  ps_y1: number;
  bound_y1: number;
  counts: MetricCounts;
  flags: string[];
}

export interface RankedRow extends Metrics {
  concept: string;
  target_class: number;
  origin: string;
  support: Record<string, number>;
}

export interface CoarseRow {
  concept: string;
  target_class: number;
  origin: string;
  di: number | null;
  degenerate: boolean;
  passed: boolean;
  skipped_reason: string | null;
}

export interface LedgerEntry {
  entry_id: string;
  concepts: string[];
  combined: string;
  target_class: number;
  origin: string;
  metrics: Metrics;
  coarse_di: number | null;
}

export interface CandidatesPayload {
  ranking_key: string;
  di_threshold: number;
  ranked: RankedRow[];
  coarse: CoarseRow[];
  session: LedgerEntry[];
}

export interface RunSummary {
  run: string;
  run_id: string;
  base_rule: string;
  bias_rule: string | null;
  ranking_key: string;
  candidates: number;
}

export interface GalleryManifestItem {
  id: string;
  before: string;
  after: string;
  from_label?: number;
  to_label?: number;
  concept?: string;
  presence?: boolean;
  y_base?: number;
  y_flipped?: number;
  ice?: number;
}

export interface GalleryView extends GalleryManifestItem {
  kind: "pairs" | "interventions";
  before_svg: string;
  after_svg: string;
}

export interface EvaluateResponse extends LedgerEntry {
  job_id: string;
  status: string;
  reused: boolean;
}

export interface ApiErrorPayload {
  code: string;
  message: string;
  detail: string;
}
