"""Causal verification metrics over intervention outcome tables.

All estimators are plug-in (empirical counts, no smoothing) and computed in
double precision. Degenerate denominators yield 0 together with a flag
rather than NaN.

Definitions, for a table of rows (presence, y_base, y_flipped) where
y_flipped is the decision after removing the concept when present, or adding
it when absent:

- directed information  DI = I(c; y) / H(c), with 0*log 0 := 0 and DI := 0
  when H(c) = 0;
- individual causal effect ICE = y_base - y_flipped when present,
  y_flipped - y_base when absent; CaCE is the mean ICE;
- PNS_y = (1/n) * (#[present & y_base=y & y_flipped!=y]
                   + #[absent & y_base!=y & y_flipped=y]);
- PN_y  = #[present & y_base=y & y_flipped!=y] / #[present & y_base=y];
- PS_y  = #[absent & y_base!=y & y_flipped=y] / #[absent & y_base!=y];
- interventional lower bound = mean 1[forced-present outcome = y]
                             - mean 1[forced-absent outcome = y].

For binary labels, CaCE = PNS_1 - PNS_0 holds exactly, and PNS_y is the
presence-weighted combination of PN_y and PS_y.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple


class MetricError(ValueError):
    """Invalid metric input."""


@dataclass(frozen=True)
class OutcomeRow:
    presence: bool
    y_base: int
    y_flipped: int

    def __post_init__(self):
        if self.y_base not in (0, 1) or self.y_flipped not in (0, 1):
            raise MetricError("labels must be binary")


@dataclass(frozen=True)
class OutcomeTable:
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))

    def __len__(self) -> int:
        return len(self.rows)

    @classmethod
    def from_triples(cls, triples: Iterable[Tuple[int, int, int]]) -> "OutcomeTable":
        return cls(rows=tuple(OutcomeRow(bool(p), int(yb), int(yf)) for p, yb, yf in triples))

    def to_dict(self) -> dict:
        return {"rows": [[int(r.presence), r.y_base, r.y_flipped] for r in self.rows]}


def _require_nonempty(table: OutcomeTable) -> None:
    if len(table) == 0:
        raise MetricError("empty outcome table")


def directed_information(presence: Sequence[bool], labels: Sequence[int]) -> float:
    """Normalized mutual information I(c; y) / H(c) from empirical counts.

    Returns a value in [0, 1]; 0 when the concept presence is constant
    (H(c) = 0). Invariant under the logarithm base, since the base cancels
    in the ratio.
    """
    value, _ = directed_information_flagged(presence, labels)
    return value


def directed_information_flagged(
    presence: Sequence[bool], labels: Sequence[int], log=math.log
) -> Tuple[float, bool]:
    """DI plus a degeneracy flag (True when H(c) = 0)."""
    if len(presence) != len(labels):
        raise MetricError("presence and labels must have equal length")
    if len(presence) == 0:
        raise MetricError("empty input")
    n = len(presence)
    joint = {(c, y): 0 for c in (0, 1) for y in (0, 1)}
    for c, y in zip(presence, labels):
        if y not in (0, 1):
            raise MetricError("labels must be binary")
        joint[(int(bool(c)), y)] += 1
    p_c = {c: (joint[(c, 0)] + joint[(c, 1)]) / n for c in (0, 1)}
    p_y = {y: (joint[(0, y)] + joint[(1, y)]) / n for y in (0, 1)}

    h_c = -sum(p * log(p) for p in p_c.values() if p > 0)
    if h_c == 0.0:
        return 0.0, True
    mi = 0.0
    for (c, y), count in joint.items():
        if count == 0:
            continue
        p_cy = count / n
        mi += p_cy * log(p_cy / (p_c[c] * p_y[y]))
    di = mi / h_c
    # clamp tiny float excursions outside [0, 1]
    return min(1.0, max(0.0, di)), False


def ice(row: OutcomeRow) -> int:
    """Per-row decision change under the intervention."""
    if row.presence:
        return row.y_base - row.y_flipped
    return row.y_flipped - row.y_base


def cace(table: OutcomeTable) -> float:
    """Mean individual causal effect; in [-1, 1] for binary labels."""
    _require_nonempty(table)
    return sum(ice(r) for r in table.rows) / len(table)


def pns_hat(table: OutcomeTable, y: int) -> float:
    """Empirical probability of the concept being a necessary and sufficient
    cause of class y."""
    _require_nonempty(table)
    hits = 0
    for r in table.rows:
        if r.presence:
            hits += int(r.y_flipped != y and r.y_base == y)
        else:
            hits += int(r.y_flipped == y and r.y_base != y)
    return hits / len(table)


def pn_hat(table: OutcomeTable, y: int) -> float:
    value, _ = pn_hat_flagged(table, y)
    return value


def pn_hat_flagged(table: OutcomeTable, y: int) -> Tuple[float, bool]:
    """Among rows with the concept present and decision y: how often removing
    the concept changes the decision. (0, flagged) when no such row exists."""
    _require_nonempty(table)
    num = den = 0
    for r in table.rows:
        if r.presence and r.y_base == y:
            den += 1
            num += int(r.y_flipped != y)
    if den == 0:
        return 0.0, True
    return num / den, False


def ps_hat(table: OutcomeTable, y: int) -> float:
    value, _ = ps_hat_flagged(table, y)
    return value


def ps_hat_flagged(table: OutcomeTable, y: int) -> Tuple[float, bool]:
    """Among rows with the concept absent and decision != y: how often adding
    the concept yields decision y. (0, flagged) when no such row exists."""
    _require_nonempty(table)
    num = den = 0
    for r in table.rows:
        if not r.presence and r.y_base != y:
            den += 1
            num += int(r.y_flipped == y)
    if den == 0:
        return 0.0, True
    return num / den, False


def interventional_bound(table: OutcomeTable, y: int) -> float:
    """Difference of the two forced-intervention outcome rates.

    Forcing the concept present leaves present rows at y_base and sends
    absent rows to y_flipped; forcing it absent does the opposite. The
    result lower-bounds pns_hat for the same class.
    """
    _require_nonempty(table)
    forced_present = forced_absent = 0
    for r in table.rows:
        f1 = r.y_base if r.presence else r.y_flipped
        f0 = r.y_flipped if r.presence else r.y_base
        forced_present += int(f1 == y)
        forced_absent += int(f0 == y)
    n = len(table)
    return forced_present / n - forced_absent / n


@dataclass
class MetricReport:
    """Every Stage 4 number for one candidate concept, with degeneracy flags."""

    cace: float
    pns_y1: float
    pns_y0: float
    pn_y1: float
    ps_y1: float
    bound_y1: float
    n_total: int
    n_present: int
    n_absent: int
    n_dropped: int = 0
    di: Optional[float] = None
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "di": self.di,
            "cace": self.cace,
            "pns_y1": self.pns_y1,
            "pns_y0": self.pns_y0,
            "pn_y1": self.pn_y1,
            "ps_y1": self.ps_y1,
            "bound_y1": self.bound_y1,
            "counts": {
                "total": self.n_total,
                "present": self.n_present,
                "absent": self.n_absent,
                "dropped": self.n_dropped,
            },
            "flags": sorted(self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        counts = d.get("counts", {})
        return cls(
            di=d.get("di"),
            cace=d["cace"],
            pns_y1=d["pns_y1"],
            pns_y0=d["pns_y0"],
            pn_y1=d["pn_y1"],
            ps_y1=d["ps_y1"],
            bound_y1=d["bound_y1"],
            n_total=counts.get("total", 0),
            n_present=counts.get("present", 0),
            n_absent=counts.get("absent", 0),
            n_dropped=counts.get("dropped", 0),
            flags=list(d.get("flags", [])),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def build_metric_report(
    table: OutcomeTable,
    di: Optional[float] = None,
    di_degenerate: bool = False,
    n_dropped: int = 0,
) -> MetricReport:
    """Assemble the full report for one outcome table."""
    _require_nonempty(table)
    pn1, pn1_flag = pn_hat_flagged(table, 1)
    ps1, ps1_flag = ps_hat_flagged(table, 1)
    flags = []
    if pn1_flag:
        flags.append("pn_y1_denominator_zero")
    if ps1_flag:
        flags.append("ps_y1_denominator_zero")
    if di_degenerate:
        flags.append("di_constant_presence")
    n_present = sum(1 for r in table.rows if r.presence)
    return MetricReport(
        di=di,
        cace=cace(table),
        pns_y1=pns_hat(table, 1),
        pns_y0=pns_hat(table, 0),
        pn_y1=pn1,
        ps_y1=ps1,
        bound_y1=interventional_bound(table, 1),
        n_total=len(table),
        n_present=n_present,
        n_absent=len(table) - n_present,
        n_dropped=n_dropped,
        flags=flags,
    )
