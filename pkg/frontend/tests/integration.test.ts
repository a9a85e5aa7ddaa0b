// Live round trip against a running exploration service. Skipped unless
// RULELENS_SERVICE_URL points at one (see the repository README: the service
// test suite starts a server over a demo run and sets this).

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ledgerRow } from "../src/table.js";

const SERVICE = process.env.RULELENS_SERVICE_URL;

describe.skipIf(!SERVICE)("live service round trip", () => {
  const api = new ApiClient(SERVICE ?? "");

  it("combining two candidates yields the server-evaluated row verbatim", async () => {
    const runs = await api.listRuns();
    expect(runs.length).toBeGreaterThan(0);
    const run = runs[runs.length - 1]!.run;

    const first = await api.evaluate(run, ["red object", "metal object"]);
    expect(first.status).toBe("done");
    expect(first.combined).toBe("color=red&material=metal");

    // the row the table displays carries exactly the served numbers
    const row = ledgerRow(first);
    expect(row.cace).toBe(first.metrics.cace);
    expect(row.pns_y1).toBe(first.metrics.pns_y1);

    // the evaluation is idempotent: a resubmission reuses the ledger entry
    const again = await api.evaluate(run, ["red object", "metal object"]);
    expect(again.reused).toBe(true);
    expect(again.entry_id).toBe(first.entry_id);
    for (const key of ["cace", "pns_y1", "pns_y0", "pn_y1", "ps_y1", "bound_y1"] as const) {
      expect(Math.abs(again.metrics[key] - first.metrics[key])).toBeLessThanOrEqual(1e-12);
    }

    // and it now appears in the session ledger the table reloads from
    const payload = await api.getCandidates(run);
    expect(payload.session.some((e) => e.entry_id === first.entry_id)).toBe(true);
  });

  it("gallery serves the run's SVGs for a pair and an intervention", async () => {
    const runs = await api.listRuns();
    const run = runs[runs.length - 1]!.run;
    const report = (await api.getRun(run)) as {
      gallery: { pairs: Array<{ id: string }>; interventions: Array<{ id: string }> };
    };
    const pair = await api.getGallery(run, report.gallery.pairs[0]!.id);
    expect(pair.before_svg.startsWith("<svg")).toBe(true);
    expect(pair.after_svg.startsWith("<svg")).toBe(true);
    const intervention = await api.getGallery(run, report.gallery.interventions[0]!.id);
    expect(intervention.before_svg.startsWith("<svg")).toBe(true);
    expect([1, 0, -1]).toContain(intervention.ice);
  });
});
