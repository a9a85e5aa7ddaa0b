import { describe, expect, it } from "vitest";

import {
  applyDiFilter,
  buildRows,
  degeneracyBadges,
  renderTable,
  sortRows,
  visibleRows,
  type TableState,
} from "../src/table.js";
import { candidatesPayload, ledgerEntry, RANKED, rankedRow } from "./fixtures.js";

const DEFAULT: TableState = { sortKey: "cace", descending: true, diFilter: null, selection: [] };

describe("sortRows", () => {
  it("matches the server ordering when sorted by the ranking key", () => {
    const rows = buildRows(candidatesPayload());
    const shuffled = [rows[3]!, rows[1]!, rows[4]!, rows[0]!, rows[2]!];
    const sorted = sortRows(shuffled, "cace", true);
    expect(sorted.map((r) => r.concept)).toEqual(RANKED.map((r) => r.concept));
  });

  it("matches a PNS-keyed server ranking including tie-breaks", () => {
    // pns: 1.0, .75, .72, .70, .10 — distinct from the cace order at rank 3
    const rows = buildRows(candidatesPayload());
    const byPns = sortRows(rows, "pns_y1", true).map((r) => r.concept);
    expect(byPns).toEqual([
      "color=cyan",
      "color=cyan&material=metal",
      "color=cyan&shape=sphere",
      "material=metal",
      "region=left",
    ]);
  });

  it("breaks exact metric ties by the canonical concept string", () => {
    const a = rankedRow("color=red", { cace: 0.5, pns_y1: 0.5 });
    const b = rankedRow("color=blue", { cace: 0.5, pns_y1: 0.5 });
    expect(sortRows([a, b], "cace", true).map((r) => r.concept)).toEqual([
      "color=blue",
      "color=red",
    ]);
  });

  it("is stable for fully identical keys", () => {
    const a = rankedRow("color=red", { origin: "miner" });
    const b = rankedRow("color=red", { origin: "llm" });
    expect(sortRows([a, b], "cace", true).map((r) => r.origin)).toEqual(["miner", "llm"]);
  });

  it("sorts null DI values last", () => {
    const rows = [rankedRow("a=never", { di: null }), rankedRow("color=red", { di: 0.1 })];
    const sorted = sortRows(rows, "di", true);
    expect(sorted[sorted.length - 1]!.di).toBeNull();
  });
});

describe("di filter", () => {
  it("hides rows below the threshold", () => {
    const rows = buildRows(candidatesPayload());
    const kept = applyDiFilter(rows, 0.15);
    expect(kept.map((r) => r.concept)).toContain("region=left");
    expect(applyDiFilter(rows, 0.17).map((r) => r.concept)).not.toContain("region=left");
  });

  it("null threshold keeps everything", () => {
    const rows = buildRows(candidatesPayload());
    expect(applyDiFilter(rows, null)).toHaveLength(rows.length);
  });
});

describe("renderTable", () => {
  it("renders an empty state", () => {
    const html = renderTable([], DEFAULT);
    expect(html).toContain("no candidates to show");
  });

  it("shows degeneracy badges from server flags", () => {
    const row = RANKED[4]!;
    expect(degeneracyBadges(row)).toEqual(["ps_y1_denominator_zero"]);
    const html = renderTable([row], DEFAULT);
    expect(html).toContain('title="ps_y1_denominator_zero"');
  });

  it("carries raw server values in data attributes (no client math)", () => {
    const payload = candidatesPayload([ledgerEntry("color=red&material=metal")]);
    const rows = buildRows(payload);
    const html = renderTable(rows, DEFAULT);
    const user = payload.session[0]!;
    expect(html).toContain(`data-cace="${user.metrics.cace}"`);
    expect(html).toContain(`data-pns="${user.metrics.pns_y1}"`);
  });

  it("escapes html in concept names", () => {
    const html = renderTable([rankedRow('color=red"><script>')], DEFAULT);
    expect(html).not.toContain("<script>");
  });

  it("hides sub-threshold rows when the filter is active", () => {
    const rows = buildRows(candidatesPayload());
    const html = renderTable(rows, { ...DEFAULT, diFilter: 0.17 });
    expect(html).not.toContain("region=left");
  });
});

describe("visibleRows", () => {
  it("composes filter and sort", () => {
    const rows = buildRows(candidatesPayload());
    const shown = visibleRows(rows, { ...DEFAULT, diFilter: 0.17, sortKey: "di", descending: false });
    expect(shown[0]!.concept).toBe("material=metal");
  });
});
