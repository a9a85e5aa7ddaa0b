"""Minimal-edit counterfactual search: find the fewest primitive edits that
flip the classifier's decision on a scene.

The search is breadth-first over edit depth with deterministic neighbor
ordering, so the returned trace is the lexicographically least among the
shortest flipping traces. By default, candidate edits are restricted to the
model's vocabulary closure (the attribute values and regions its rules
mention, plus removals); this prunes edits that provably cannot affect the
decision. An exhaustive mode generating every primitive edit is available
for verification.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, List

from .classifier import RuleClassifier, classify
from .concepts import cell_in_region
from .scene import (
    ATTR_FIELDS,
    ATTR_VALUES,
    Edit,
    EditError,
    Scene,
    SceneObject,
    apply_edit,
)

_KIND_FOR_FIELD = {"color": "recolor", "material": "rematerial", "shape": "reshape", "size": "resize"}


class CounterfactualNotFound(RuntimeError):
    """No flipping trace exists within the edit budget (model locally constant)."""


@dataclass(frozen=True)
class CounterfactualPair:
    source: Scene
    target: Scene
    trace: tuple
    from_label: int
    to_label: int

    def to_dict(self) -> dict:
        return {
            "source": self.source.to_dict(),
            "target": self.target.to_dict(),
            "trace": [e.to_dict() for e in self.trace],
            "from_label": self.from_label,
            "to_label": self.to_label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CounterfactualPair":
        return cls(
            source=Scene.from_dict(d["source"]),
            target=Scene.from_dict(d["target"]),
            trace=tuple(Edit.from_dict(e) for e in d["trace"]),
            from_label=int(d["from_label"]),
            to_label=int(d["to_label"]),
        )


@dataclass
class PairSetResult:
    pairs: List[CounterfactualPair] = field(default_factory=list)
    failures: List[dict] = field(default_factory=list)


def _model_vocabulary(model: RuleClassifier) -> dict:
    """Attribute values and regions mentioned by the model's rules."""
    vocab = {f: [] for f in ATTR_FIELDS}
    vocab["region"] = []
    for rule in model.concepts():
        for fld, value in rule.conjuncts:
            if value not in vocab[fld]:
                vocab[fld].append(value)
    return vocab


def _off_value(fld: str, vocab_values: Iterable[str]) -> str:
    for v in ATTR_VALUES[fld]:
        if v not in vocab_values:
            return v
    return ATTR_VALUES[fld][0]


def _region_signature(cell: tuple, grid_w: int, grid_h: int) -> tuple:
    return tuple(cell_in_region(cell, r, grid_w, grid_h) for r in ("left", "right", "near"))


def _restricted_edits(scene: Scene, model: RuleClassifier) -> list:
    """Vocabulary-closure neighbors: every edit that can change which objects
    satisfy the model's rules is represented, so minimal depth is preserved."""
    vocab = _model_vocabulary(model)
    edits: list = []

    for obj in scene.objects:
        edits.append(Edit(kind="remove", before=obj))
        for fld in ATTR_FIELDS:
            if not vocab[fld]:
                continue  # field never inspected by the model
            targets = set(vocab[fld])
            targets.add(_off_value(fld, vocab[fld]))
            for value in targets:
                if value != getattr(obj, fld):
                    after = _replace_field(obj, fld, value)
                    edits.append(Edit(kind=_KIND_FOR_FIELD[fld], before=obj, after=after))

    free = scene.free_cells()
    if vocab["region"]:
        # one move target per distinct region signature is enough to realize
        # any region membership change
        sig_cells: dict = {}
        for cell in free:
            sig = _region_signature(cell, scene.grid_w, scene.grid_h)
            sig_cells.setdefault(sig, cell)
        for obj in scene.objects:
            own_sig = _region_signature(obj.cell(), scene.grid_w, scene.grid_h)
            for sig, cell in sig_cells.items():
                if sig != own_sig:
                    after = SceneObject(
                        col=cell[0], row=cell[1],
                        shape=obj.shape, color=obj.color,
                        material=obj.material, size=obj.size,
                    )
                    edits.append(Edit(kind="move", before=obj, after=after))

    for rule in model.concepts():
        fixed = {f: v for f, v in rule.conjuncts if f != "region"}
        regions = [v for f, v in rule.conjuncts if f == "region"]
        cells = [
            cell for cell in free
            if all(cell_in_region(cell, r, scene.grid_w, scene.grid_h) for r in regions)
        ]
        if not cells:
            continue
        cell = cells[0]
        template = SceneObject(
            col=cell[0], row=cell[1],
            shape=fixed.get("shape", ATTR_VALUES["shape"][0]),
            color=fixed.get("color", ATTR_VALUES["color"][0]),
            material=fixed.get("material", ATTR_VALUES["material"][0]),
            size=fixed.get("size", ATTR_VALUES["size"][0]),
        )
        edits.append(Edit(kind="add", after=template))

    return edits


def _exhaustive_edits(scene: Scene) -> list:
    """Every primitive edit: all attribute changes, all moves, all adds."""
    edits: list = []
    free = scene.free_cells()
    for obj in scene.objects:
        edits.append(Edit(kind="remove", before=obj))
        for fld in ATTR_FIELDS:
            for value in ATTR_VALUES[fld]:
                if value != getattr(obj, fld):
                    edits.append(Edit(kind=_KIND_FOR_FIELD[fld], before=obj, after=_replace_field(obj, fld, value)))
        for cell in free:
            edits.append(Edit(kind="move", before=obj, after=SceneObject(
                col=cell[0], row=cell[1], shape=obj.shape, color=obj.color,
                material=obj.material, size=obj.size)))
    for cell in free:
        for shape in ATTR_VALUES["shape"]:
            for color in ATTR_VALUES["color"]:
                for material in ATTR_VALUES["material"]:
                    for size in ATTR_VALUES["size"]:
                        edits.append(Edit(kind="add", after=SceneObject(
                            col=cell[0], row=cell[1], shape=shape, color=color,
                            material=material, size=size)))
    return edits


def _replace_field(obj: SceneObject, fld: str, value: str) -> SceneObject:
    kwargs = {"col": obj.col, "row": obj.row, "shape": obj.shape,
              "color": obj.color, "material": obj.material, "size": obj.size}
    kwargs[fld] = value
    return SceneObject(**kwargs)


def neighbor_edits(scene: Scene, model: RuleClassifier, mode: str = "restricted") -> list:
    """Candidate single edits in deterministic (kind, object index, value) order."""
    if mode == "restricted":
        edits = _restricted_edits(scene, model)
    elif mode == "exhaustive":
        edits = _exhaustive_edits(scene)
    else:
        raise ValueError(f"unknown neighbor mode {mode!r}")
    edits.sort(key=lambda e: e.sort_key(scene))
    return edits


def _flip_lower_bound(scene: Scene, model: RuleClassifier) -> int:
    """Exact necessity bound when the flip must clear rule presence: every
    object matching an active rule needs at least one edit."""
    from .concepts import object_satisfies

    matching = 0
    for obj in scene.objects:
        if any(object_satisfies(obj, c, scene.grid_w, scene.grid_h) for c in model.concepts()):
            matching += 1
    return matching


def find_counterfactual(
    scene: Scene,
    model: RuleClassifier,
    budget: int = 3,
    rng_seed: int = 0,
    mode: str = "restricted",
) -> CounterfactualPair:
    """Shortest flipping trace within `budget` edits, ties broken
    lexicographically over (edit kind, object index, new value).

    The search itself is fully deterministic; `rng_seed` is accepted for
    interface symmetry with the samplers and recorded nowhere.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    from_label = classify(model, scene)

    raw_present = from_label == model.presence_class
    if raw_present and _flip_lower_bound(scene, model) > budget:
        raise CounterfactualNotFound(
            f"budget exhausted: flipping needs at least "
            f"{_flip_lower_bound(scene, model)} edits, budget is {budget}"
        )

    frontier = [(scene, ())]
    visited = {scene.key()}
    for _depth in range(budget):
        next_frontier = []
        for current, trace in frontier:
            for edit in neighbor_edits(current, model, mode=mode):
                try:
                    nxt = apply_edit(current, edit)
                except EditError:
                    continue
                key = nxt.key()
                if key in visited:
                    continue
                visited.add(key)
                new_trace = trace + (edit,)
                if classify(model, nxt) != from_label:
                    return CounterfactualPair(
                        source=scene,
                        target=nxt,
                        trace=new_trace,
                        from_label=from_label,
                        to_label=1 - from_label,
                    )
                next_frontier.append((nxt, new_trace))
        frontier = next_frontier
    raise CounterfactualNotFound(f"budget exhausted: no flip within {budget} edits")


def build_pair_set(
    scenes: Iterable[Scene],
    model: RuleClassifier,
    budget: int = 3,
    seed: int = 0,
    mode: str = "restricted",
) -> PairSetResult:
    """One counterfactual pair per scene where the search succeeds; failures
    are recorded with their reason. Input order is preserved."""
    result = PairSetResult()
    for i, scene in enumerate(scenes):
        try:
            pair = find_counterfactual(scene, model, budget=budget, rng_seed=seed, mode=mode)
            result.pairs.append(pair)
        except CounterfactualNotFound as exc:
            result.failures.append({"index": i, "scene_id": scene.id, "reason": str(exc)})
    return result


def write_pairs_jsonl(path, pairs: Iterable[CounterfactualPair]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_dict(), sort_keys=True, separators=(",", ":")) + "\n")


def read_pairs_jsonl(path) -> list:
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                pairs.append(CounterfactualPair.from_dict(json.loads(line)))
    return pairs
