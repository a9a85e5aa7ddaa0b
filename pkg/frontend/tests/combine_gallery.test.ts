import { describe, expect, it } from "vitest";

import { buildEvaluationRequest, renderCombineBar } from "../src/combine.js";
import { renderGallery, renderGalleryPicker } from "../src/gallery.js";
import { ledgerRow } from "../src/table.js";
import { evaluateResponse, galleryView } from "./fixtures.js";

describe("combine builder", () => {
  it("requires at least one selection", () => {
    expect(() => buildEvaluationRequest([])).toThrow();
    expect(buildEvaluationRequest(["color=red"])).toEqual(["color=red"]);
  });

  it("round-trips server metrics verbatim into the new row", () => {
    const response = evaluateResponse("color=red&material=metal");
    const row = ledgerRow(response);
    // every metric field is the server's number, bit for bit
    expect(row.cace).toBe(response.metrics.cace);
    expect(row.pns_y1).toBe(response.metrics.pns_y1);
    expect(row.pns_y0).toBe(response.metrics.pns_y0);
    expect(row.pn_y1).toBe(response.metrics.pn_y1);
    expect(row.ps_y1).toBe(response.metrics.ps_y1);
    expect(row.bound_y1).toBe(response.metrics.bound_y1);
    expect(row.counts).toEqual(response.metrics.counts);
    expect(row.origin).toBe("user");
  });

  it("renders chips, hint, and inline errors", () => {
    expect(renderCombineBar([], null, false)).toContain("select rows to combine");
    const html = renderCombineBar(["color=red", "material=metal"], null, false);
    expect(html).toContain("color=red");
    expect(html).toContain("combine & evaluate");
    const withError = renderCombineBar(["color=red"], "cannot combine (red vs blue)", false);
    expect(withError).toContain('class="error"');
    expect(withError).toContain("cannot combine");
  });

  it("disables the button while an evaluation is in flight", () => {
    expect(renderCombineBar(["color=red"], null, true)).toContain("disabled");
  });
});

describe("gallery view", () => {
  it("renders the server SVGs verbatim for a counterfactual pair", () => {
    const view = galleryView("pairs");
    const html = renderGallery(view, null);
    expect(html).toContain(view.before_svg);
    expect(html).toContain(view.after_svg);
    expect(html).toContain("decision flipped 1 → 0");
  });

  it("shows the intervention's ICE sign and direction", () => {
    const html = renderGallery(galleryView("interventions"), null);
    expect(html).toContain("ICE +1");
    expect(html).toContain("removed");
    expect(html).toContain("decision 1 → 0");
  });

  it("renders a placeholder for a missing asset", () => {
    const html = renderGallery(null, "pair-0042");
    expect(html).toContain("placeholder");
    expect(html).toContain("pair-0042");
  });

  it("renders an empty prompt when nothing is selected", () => {
    expect(renderGallery(null, null)).toContain("pick a pair");
  });

  it("picker lists the manifest ids", () => {
    const html = renderGalleryPicker(["pair-0000", "intervention-0000"], "pair-0000");
    expect(html).toContain('value="pair-0000" selected');
    expect(html).toContain("intervention-0000");
    expect(renderGalleryPicker([], null)).toContain("no gallery items");
  });
});
