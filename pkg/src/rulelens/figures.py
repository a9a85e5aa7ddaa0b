"""Matplotlib figure rendering for run reports and suite summaries.

Figures are written next to the JSON/JSONL artifacts; they are a viewing
convenience and are not part of the byte-stable artifact set.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def candidate_metrics_figure(rows: Sequence[dict], path, title: str = "candidate metrics",
                             di_threshold: float = 0.15, max_rows: int = 20) -> None:
    """Horizontal bars of DI / CaCE / PNS per ranked candidate."""
    rows = list(rows)[:max_rows]
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.45 * len(rows) + 1.2)))
    if rows:
        names = [r["concept"] for r in rows][::-1]
        di = [r.get("di") or 0.0 for r in rows][::-1]
        cace = [r.get("cace") or 0.0 for r in rows][::-1]
        pns = [r.get("pns_y1") or 0.0 for r in rows][::-1]
        y = range(len(rows))
        h = 0.27
        ax.barh([i + h for i in y], di, height=h, color="#b0bec5", label="DI")
        ax.barh(list(y), cace, height=h, color="#1565c0", label="CaCE")
        ax.barh([i - h for i in y], pns, height=h, color="#2e7d32", label="PNS (y=1)")
        ax.set_yticks(list(y))
        ax.set_yticklabels(names, fontsize=8)
        ax.axvline(di_threshold, color="#b0bec5", linestyle=":", linewidth=1)
        ax.legend(fontsize=8, loc="lower right")
    else:
        ax.text(0.5, 0.5, "no candidates", ha="center", va="center")
    ax.set_xlim(-1.02, 1.02)
    ax.set_xlabel("metric value")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)


def recovery_summary_figure(per_rule: Sequence[dict], path) -> None:
    """CaCE / PNS of the planted rule per trial, with success markers."""
    fig, ax = plt.subplots(figsize=(8, 3.6))
    if per_rule:
        names = [r["rule"] for r in per_rule]
        cace = [r.get("planted_cace") or 0.0 for r in per_rule]
        pns = [r.get("planted_pns") or 0.0 for r in per_rule]
        x = range(len(names))
        w = 0.38
        ax.bar([i - w / 2 for i in x], cace, width=w, color="#1565c0", label="CaCE")
        ax.bar([i + w / 2 for i in x], pns, width=w, color="#2e7d32", label="PNS (y=1)")
        for i, r in enumerate(per_rule):
            mark = "✓" if r.get("recovered") else "✗"
            ax.text(i, 1.02, mark, ha="center", fontsize=11,
                    color="#2e7d32" if r.get("recovered") else "#c62828")
        ax.set_xticks(list(x))
        ax.set_xticklabels(names, fontsize=8, rotation=20, ha="right")
        ax.legend(fontsize=8)
    ax.set_ylim(0, 1.1)
    ax.set_ylabel("metric value")
    ax.set_title("planted-rule recovery")
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)


def bias_probe_figure(probes: Sequence[dict], path, di_threshold: float = 0.15) -> None:
    """DI of the region probes for the biased model and the control."""
    fig, ax = plt.subplots(figsize=(7, 3.2))
    if probes:
        names = [p["concept"] for p in probes]
        biased = [p.get("di_biased") or 0.0 for p in probes]
        control = [p.get("di_control") or 0.0 for p in probes]
        x = range(len(names))
        w = 0.38
        ax.bar([i - w / 2 for i in x], biased, width=w, color="#c62828", label="biased model")
        ax.bar([i + w / 2 for i in x], control, width=w, color="#90a4ae", label="control")
        ax.axhline(di_threshold, color="#455a64", linestyle=":", linewidth=1, label="DI threshold")
        ax.set_xticks(list(x))
        ax.set_xticklabels(names, fontsize=8)
        ax.legend(fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("directed information")
    ax.set_title("region-probe correlation")
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)
