"""Candidate global explanations mined from change-caption evidence.

The deterministic miner favors recall: it enumerates every attribute
conjunction supported by the evidence, including overspecified and partial
concepts, because wrong candidates are cheap to reject during causal
verification. An LLM wire client with the same output contract is provided
for free-text summarization.
"""
from __future__ import annotations

import itertools
import json
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

from .captioning import ChangeCaption, parse_object_line
from .concepts import Concept, ConceptError, cell_in_region, parse_concept
from .scene import ATTR_FIELDS, DEFAULT_GRID_H, DEFAULT_GRID_W, SceneObject
from .wire import EndpointConfig, chat_complete, load_prompt

logger = logging.getLogger(__name__)

REGION_VALUES = ("left", "right", "near")


@dataclass
class CandidateExplanation:
    """A hypothesis 'class `target_class` tracks `concept`' with its evidence support."""

    target_class: int
    concept: Concept
    support: dict = field(default_factory=lambda: {"0to1": 0, "1to0": 0})
    origin: str = "miner"

    @property
    def total_support(self) -> int:
        return sum(self.support.values())

    def key(self) -> tuple:
        return (self.target_class, self.concept.to_string())

    def to_dict(self) -> dict:
        return {
            "target_class": self.target_class,
            "concept": self.concept.to_string(),
            "support": dict(self.support),
            "origin": self.origin,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CandidateExplanation":
        from .concepts import concept_from_string

        return cls(
            target_class=int(d["target_class"]),
            concept=concept_from_string(d["concept"]),
            support=dict(d.get("support", {"0to1": 0, "1to0": 0})),
            origin=d.get("origin", "miner"),
        )


def _descriptor_satisfies(obj: SceneObject, conjuncts, grid_w: int, grid_h: int) -> bool:
    for fld, value in conjuncts:
        if fld == "region":
            if not cell_in_region(obj.cell(), value, grid_w, grid_h):
                return False
        elif getattr(obj, fld) != value:
            return False
    return True


def _gained_lost(caption: ChangeCaption) -> Tuple[list, list]:
    gained, lost = [], []
    for event in caption.events:
        if event.kind == "appeared":
            gained.append(event.after)
        elif event.kind == "disappeared":
            lost.append(event.before)
        else:  # attribute_changed, moved
            gained.append(event.after)
            lost.append(event.before)
    return gained, lost


def _evidence_sets(evidence: Sequence[ChangeCaption]):
    """Per tuple: the descriptor set whose presence argues for class 1 resp. 0.

    A 0->1 flip gained its class-1 evidence; a 1->0 flip lost it.
    """
    per_tuple = []
    for caption in evidence:
        gained, lost = _gained_lost(caption)
        if caption.direction == (0, 1):
            per_tuple.append((caption.direction, gained, lost))
        elif caption.direction == (1, 0):
            per_tuple.append((caption.direction, lost, gained))
        else:
            raise ValueError(f"direction must flip a binary label, got {caption.direction}")
    return per_tuple


def _vocabulary(descriptors: Iterable[SceneObject], grid_w: int, grid_h: int) -> list:
    items = set()
    for obj in descriptors:
        for fld in ATTR_FIELDS:
            items.add((fld, getattr(obj, fld)))
        for region in REGION_VALUES:
            if cell_in_region(obj.cell(), region, grid_w, grid_h):
                items.add(("region", region))
    return sorted(items)


def _enumerate_concepts(vocab: list, max_arity: int) -> list:
    out = []
    for arity in range(1, max_arity + 1):
        for combo in itertools.combinations(vocab, arity):
            try:
                out.append(Concept(conjuncts=combo))
            except ConceptError:
                continue
    return out


def mine_candidates(
    evidence: Sequence[ChangeCaption],
    max_arity: int = 3,
    top_k: int = 20,
    grid_w: int = DEFAULT_GRID_W,
    grid_h: int = DEFAULT_GRID_H,
) -> List[CandidateExplanation]:
    """Enumerate attribute conjunctions and score them by evidence support.

    A tuple supports (concept, class 1) when some descriptor it gained on a
    0->1 flip (or lost on a 1->0 flip) satisfies every conjunct; class 0 is
    the mirror. Emits up to top_k candidates per class, ordered by support
    descending then canonical string, so the output is permutation-invariant
    over the evidence order.
    """
    if not (1 <= max_arity <= 3):
        raise ValueError("max_arity must be in 1..3")
    if not evidence:
        raise ValueError("evidence must be nonempty")
    per_tuple = _evidence_sets(evidence)

    candidates: List[CandidateExplanation] = []
    for target_class in (1, 0):
        descriptors = []
        for direction, for_1, for_0 in per_tuple:
            descriptors.extend(for_1 if target_class == 1 else for_0)
        if not descriptors:
            continue
        vocab = _vocabulary(descriptors, grid_w, grid_h)
        scored = []
        for concept in _enumerate_concepts(vocab, max_arity):
            counts = {"0to1": 0, "1to0": 0}
            for direction, for_1, for_0 in per_tuple:
                designated = for_1 if target_class == 1 else for_0
                if any(_descriptor_satisfies(o, concept.conjuncts, grid_w, grid_h)
                       for o in designated):
                    counts["0to1" if direction == (0, 1) else "1to0"] += 1
            total = counts["0to1"] + counts["1to0"]
            if total > 0:
                scored.append(CandidateExplanation(
                    target_class=target_class, concept=concept,
                    support=counts, origin="miner"))
        scored.sort(key=lambda c: (-c.total_support, c.concept.to_string()))
        candidates.extend(scored[:top_k])

    if not candidates:
        logger.warning("mined no candidates: evidence contained no usable change events")
    return candidates


def mine_independent(
    labeled_captions: Sequence[Tuple[str, int]],
    top_k: int = 20,
    grid_w: int = DEFAULT_GRID_W,
    grid_h: int = DEFAULT_GRID_H,
) -> List[CandidateExplanation]:
    """Mine candidates from whole-scene captions pooled by predicted class.

    Without pairing, the summarizer can only compare how often each single
    attribute value is present across the two pools, so candidates are
    single-conjunct concepts scored by the presence-count difference;
    cross-attribute bindings are not recoverable from pooled descriptions.
    """
    if not labeled_captions:
        raise ValueError("labeled captions must be nonempty")
    presence = {0: {}, 1: {}}
    totals = {0: 0, 1: 0}
    for text, label in labeled_captions:
        if label not in (0, 1):
            raise ValueError("labels must be binary")
        totals[label] += 1
        values = set()
        for line in text.splitlines():
            obj = parse_object_line(line)
            if obj is None:
                continue
            for fld in ATTR_FIELDS:
                values.add((fld, getattr(obj, fld)))
            for region in REGION_VALUES:
                if cell_in_region(obj.cell(), region, grid_w, grid_h):
                    values.add(("region", region))
        for item in values:
            presence[label][item] = presence[label].get(item, 0) + 1

    vocab = sorted(set(presence[0]) | set(presence[1]))
    candidates: List[CandidateExplanation] = []
    for target_class in (1, 0):
        other = 1 - target_class
        scored = []
        for item in vocab:
            diff = presence[target_class].get(item, 0) - presence[other].get(item, 0)
            if diff > 0:
                scored.append((diff, Concept(conjuncts=(item,))))
        scored.sort(key=lambda t: (-t[0], t[1].to_string()))
        for diff, concept in scored[:top_k]:
            direction = "0to1" if target_class == 1 else "1to0"
            support = {"0to1": 0, "1to0": 0}
            support[direction] = diff
            candidates.append(CandidateExplanation(
                target_class=target_class, concept=concept,
                support=support, origin="miner"))
    return candidates


def render_evidence(evidence: Sequence[ChangeCaption]) -> str:
    """Evidence block for the summarization prompt: captions grouped by flip
    direction, class names given only as 0/1."""
    blocks = []
    for direction in ((0, 1), (1, 0)):
        for caption in evidence:
            if caption.direction != direction:
                continue
            lines = "\n".join(f"  {line}" for line in caption.rendered.splitlines())
            blocks.append(f"---\nFrom class {direction[0]} to class {direction[1]}:\n{lines}")
    return "\n".join(blocks)


_BULLET_RE = re.compile(r"^[\s\-\*•\d\.\)]+")
_CLASS_RE = re.compile(r"\bclass\s*([01])\b[:\s]*", re.IGNORECASE)


def parse_llm_bullets(text: str) -> List[CandidateExplanation]:
    """Turn a bulleted model response into candidates; unparseable bullets
    become opaque candidates, never errors."""
    candidates = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or not _BULLET_RE.match(raw.strip()[:1] or " "):
            continue
        line = _BULLET_RE.sub("", line).strip()
        if not line:
            continue
        target_class = 1
        m = _CLASS_RE.search(line)
        if m:
            target_class = int(m.group(1))
            line = _CLASS_RE.sub(" ", line).strip()
        candidates.append(CandidateExplanation(
            target_class=target_class,
            concept=parse_concept(line),
            origin="llm",
        ))
    return candidates


def llm_summarize(
    config: EndpointConfig,
    evidence: Sequence[ChangeCaption],
    prompt_template: Optional[str] = None,
    transport=None,
    transcript_dir=None,
) -> List[CandidateExplanation]:
    """Send the grouped evidence to a chat endpoint and parse its bulleted
    hypotheses into candidates. The raw transcript is persisted by the client."""
    if not evidence:
        raise ValueError("evidence must be nonempty")
    template = prompt_template if prompt_template is not None else load_prompt("summarize_factors")
    prompt = template.replace("{EVIDENCE}", render_evidence(evidence))
    response = chat_complete(
        config,
        [{"role": "user", "content": prompt}],
        transport=transport,
        transcript_dir=transcript_dir,
    )
    return parse_llm_bullets(response)


def dedupe(candidates: Sequence[CandidateExplanation]) -> List[CandidateExplanation]:
    """Collapse candidates with the same (class, canonical concept); support is
    merged by max per direction and origins are combined. Order is stable."""
    merged = {}
    order = []
    for cand in candidates:
        k = cand.key()
        if k not in merged:
            merged[k] = CandidateExplanation(
                target_class=cand.target_class,
                concept=cand.concept,
                support=dict(cand.support),
                origin=cand.origin,
            )
            order.append(k)
        else:
            prev = merged[k]
            for direction in ("0to1", "1to0"):
                prev.support[direction] = max(
                    prev.support.get(direction, 0), cand.support.get(direction, 0))
            origins = set(prev.origin.split("+")) | set(cand.origin.split("+"))
            prev.origin = "+".join(sorted(origins))
    return [merged[k] for k in order]


def write_candidates_jsonl(path, candidates: Iterable[CandidateExplanation]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for cand in candidates:
            fh.write(json.dumps(cand.to_dict(), sort_keys=True, separators=(",", ":")) + "\n")


def read_candidates_jsonl(path) -> List[CandidateExplanation]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(CandidateExplanation.from_dict(json.loads(line)))
    return out
