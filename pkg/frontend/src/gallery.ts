// Gallery view: side-by-side before/after SVGs with the model's labels. The
// server SVG text is rendered verbatim; a missing asset renders a
// placeholder instead of breaking the page.

import { escapeHtml } from "./table.js";
import type { GalleryView } from "./types.js";

export function renderGalleryPicker(items: string[], current: string | null): string {
  if (items.length === 0) {
    return '<div class="gallery-picker empty">no gallery items</div>';
  }
  const options = items
    .map((id) => `<option value="${escapeHtml(id)}"${id === current ? " selected" : ""}>${escapeHtml(id)}</option>`)
    .join("");
  return `<select data-action="pick-gallery"><option value="">choose…</option>${options}</select>`;
}

export function renderGallery(view: GalleryView | null, missingId: string | null): string {
  if (missingId !== null) {
    return (
      `<div class="gallery placeholder">asset ${escapeHtml(missingId)} is not available` +
      `<div class="ghost">▢ ▢</div></div>`
    );
  }
  if (view === null) {
    return '<div class="gallery empty">pick a pair or intervention to view</div>';
  }
  let caption: string;
  if (view.kind === "pairs") {
    caption = `decision flipped ${view.from_label} → ${view.to_label}`;
  } else {
    const sign = (view.ice ?? 0) > 0 ? "+" : "";
    caption =
      `intervention on ${escapeHtml(view.concept ?? "")}: ` +
      `${view.presence ? "removed" : "added"}, decision ${view.y_base} → ${view.y_flipped} ` +
      `(ICE ${sign}${view.ice})`;
  }
  return (
    `<div class="gallery"><div class="caption">${caption}</div>` +
    `<div class="panes"><figure><figcaption>before</figcaption>${view.before_svg}</figure>` +
    `<figure><figcaption>after</figcaption>${view.after_svg}</figure></div></div>`
  );
}
