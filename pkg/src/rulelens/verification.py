"""Stage 4 orchestration: validation-set building, partitioning by concept
presence, intervention execution, the coarse correlation filter and the fine
causal evaluation, and ranking.

Everything here is deterministic given the seeds; candidate evaluations are
independent of each other.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

from .classifier import RuleClassifier, classify
from .concepts import Concept, OpaqueConceptError, eval_concept
from .metrics import (
    MetricReport,
    OutcomeRow,
    OutcomeTable,
    build_metric_report,
    directed_information_flagged,
)
from .scene import EditError, Scene, WorldConfig, edit_add, edit_remove
from .summarizer import CandidateExplanation

DEFAULT_DI_THRESHOLD = 0.15

VqaFn = Callable[[Scene, Concept], bool]


class ValidationSetError(RuntimeError):
    """Could not assemble the requested validation quotas."""


@dataclass(frozen=True)
class ValidationSet:
    """Scenes selected purely by the model's own predictions (never by any
    ground-truth rule): n1 predicted 1 and n0 predicted 0."""

    scenes: tuple
    labels: tuple

    def __len__(self) -> int:
        return len(self.scenes)

    @property
    def n1(self) -> int:
        return sum(self.labels)

    @property
    def n0(self) -> int:
        return len(self.labels) - self.n1


def build_validation_set(
    model: RuleClassifier,
    world: Optional[WorldConfig] = None,
    n1: int = 100,
    n0: int = 100,
    seed: int = 0,
    max_draws: int = 2_000_000,
) -> ValidationSet:
    """Sample scenes until each predicted-class quota is filled."""
    world = world or WorldConfig()
    rng = random.Random(f"validation:{seed}")
    want = {1: n1, 0: n0}
    scenes: List[Scene] = []
    labels: List[int] = []
    draws = 0
    while (want[0] > 0 or want[1] > 0) and draws < max_draws:
        scene = sample_seeded(rng, world)
        draws += 1
        label = classify(model, scene)
        if want[label] > 0:
            want[label] -= 1
            scenes.append(scene)
            labels.append(label)
    if want[0] > 0 or want[1] > 0:
        raise ValidationSetError(
            f"could not fill validation quotas within {max_draws} draws "
            f"(missing {want[1]} of class 1, {want[0]} of class 0)"
        )
    return ValidationSet(scenes=tuple(scenes), labels=tuple(labels))


def sample_seeded(rng: random.Random, world: WorldConfig) -> Scene:
    from .scene import sample_scene

    return sample_scene(rng.getrandbits(48), world)


@dataclass
class Partition:
    present: tuple
    absent: tuple
    flags: List[str] = field(default_factory=list)

    @property
    def counts(self) -> dict:
        return {"present": len(self.present), "absent": len(self.absent)}


def partition(vset: ValidationSet, concept: Concept, vqa: Optional[VqaFn] = None) -> Partition:
    """Split the validation scenes by concept presence; disjoint cover."""
    vqa = vqa or eval_concept
    present, absent = [], []
    for scene in vset.scenes:
        (present if vqa(scene, concept) else absent).append(scene)
    flags = []
    if not present:
        flags.append("no_present_scenes")
    if not absent:
        flags.append("no_absent_scenes")
    return Partition(present=tuple(present), absent=tuple(absent), flags=flags)


class OracleEditor:
    """Exact intervention editor over symbolic scenes."""

    def __init__(self, world: Optional[WorldConfig] = None):
        self.world = world

    def add(self, scene: Scene, concept: Concept, rng_seed: int) -> Scene:
        return edit_add(scene, concept, rng_seed, params=self.world)

    def remove(self, scene: Scene, concept: Concept) -> Scene:
        return edit_remove(scene, concept)


@dataclass
class InterventionRecord:
    scene: Scene
    edited: Scene
    presence: bool
    y_base: int
    y_flipped: int


@dataclass
class InterventionResult:
    table: OutcomeTable
    records: List[InterventionRecord]
    dropped: List[dict]


def build_outcome_table(
    part: Partition,
    concept: Concept,
    editor: OracleEditor,
    model: RuleClassifier,
    seed: int = 0,
) -> InterventionResult:
    """One row per scene: concept presence, base decision, and the decision
    after removing (present) or adding (absent) the concept. Scenes whose
    edit fails are dropped and reported."""
    rows: List[OutcomeRow] = []
    records: List[InterventionRecord] = []
    dropped: List[dict] = []
    rng = random.Random(f"interventions:{seed}")
    for presence, scenes in ((True, part.present), (False, part.absent)):
        for scene in scenes:
            y_base = classify(model, scene)
            try:
                if presence:
                    edited = editor.remove(scene, concept)
                else:
                    edited = editor.add(scene, concept, rng.getrandbits(48))
            except (EditError, OpaqueConceptError) as exc:
                dropped.append({"scene_id": scene.id, "presence": presence, "reason": str(exc)})
                continue
            y_flipped = classify(model, edited)
            rows.append(OutcomeRow(presence=presence, y_base=y_base, y_flipped=y_flipped))
            records.append(InterventionRecord(
                scene=scene, edited=edited, presence=presence,
                y_base=y_base, y_flipped=y_flipped))
    return InterventionResult(table=OutcomeTable(rows=tuple(rows)), records=records, dropped=dropped)


@dataclass
class CoarseResult:
    candidate: CandidateExplanation
    di: Optional[float]
    degenerate: bool
    passed: bool
    skipped_reason: Optional[str] = None


def coarse_filter(
    candidates: Sequence[CandidateExplanation],
    vset: ValidationSet,
    vqa: Optional[VqaFn] = None,
    threshold: float = DEFAULT_DI_THRESHOLD,
) -> List[CoarseResult]:
    """Directed information of every candidate against the predicted labels.

    Candidates below the threshold stay in the report but are excluded from
    fine evaluation; raising the threshold never admits more candidates.
    Opaque concepts need a wire presence client and are skipped under the
    oracle one.
    """
    vqa = vqa or eval_concept
    results = []
    for cand in candidates:
        try:
            presence = [vqa(scene, cand.concept) for scene in vset.scenes]
        except OpaqueConceptError:
            results.append(CoarseResult(
                candidate=cand, di=None, degenerate=False, passed=False,
                skipped_reason="opaque concept requires a wire presence client"))
            continue
        di, degenerate = directed_information_flagged(presence, list(vset.labels))
        results.append(CoarseResult(
            candidate=cand, di=di, degenerate=degenerate,
            passed=di >= threshold and not degenerate))
    return results


@dataclass
class EvaluatedCandidate:
    candidate: CandidateExplanation
    report: MetricReport
    result: InterventionResult


def evaluate(
    candidates: Sequence[CandidateExplanation],
    vset: ValidationSet,
    editor: Optional[OracleEditor] = None,
    model: Optional[RuleClassifier] = None,
    vqa: Optional[VqaFn] = None,
    seed: int = 0,
) -> List[EvaluatedCandidate]:
    """Full causal evaluation of each candidate; deterministic per seed.

    Candidates with opaque concepts are skipped under the oracle world (they
    need wire clients for presence and editing).
    """
    if model is None:
        raise ValueError("a model is required")
    editor = editor or OracleEditor()
    vqa = vqa or eval_concept
    out = []
    for cand in candidates:
        if cand.concept.is_opaque() and vqa is eval_concept:
            continue
        try:
            part = partition(vset, cand.concept, vqa=vqa)
        except OpaqueConceptError:
            continue
        presence = [True] * len(part.present) + [False] * len(part.absent)
        labels = [classify(model, s) for s in part.present] + [classify(model, s) for s in part.absent]
        di, degenerate = directed_information_flagged(presence, labels)
        result = build_outcome_table(part, cand.concept, editor, model, seed=seed)
        if len(result.table) == 0:
            continue
        report = build_metric_report(
            result.table, di=di, di_degenerate=degenerate, n_dropped=len(result.dropped))
        report.flags.extend(part.flags)
        out.append(EvaluatedCandidate(candidate=cand, report=report, result=result))
    return out


def rank(evaluated: Sequence[EvaluatedCandidate], key: str = "cace") -> List[EvaluatedCandidate]:
    """Order by the chosen causal metric, the other as tie-break, then the
    canonical concept string; stable and total."""
    if key not in ("cace", "pns"):
        raise ValueError("ranking key must be 'cace' or 'pns'")

    def sort_key(ev: EvaluatedCandidate) -> tuple:
        primary = ev.report.cace if key == "cace" else ev.report.pns_y1
        secondary = ev.report.pns_y1 if key == "cace" else ev.report.cace
        return (-primary, -secondary, ev.candidate.concept.to_string())

    return sorted(evaluated, key=sort_key)
