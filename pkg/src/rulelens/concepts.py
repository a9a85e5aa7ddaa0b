"""Concept grammar: conjunctions of attribute/region predicates, plus an
opaque fallback for free text that the grammar cannot express.

A concept is satisfied by a scene when some single object satisfies every
conjunct. `eval_concept` is the exact presence oracle used in place of a
visual question-answering model.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional

from .scene import ATTR_VALUES, Scene, SceneObject

REGIONS = ("left", "right", "near")

MAX_CONJUNCTS = 3

# tokens that carry no predicate content in controlled-vocabulary phrases
_FILLER = {
    "a", "an", "the", "object", "objects", "vehicle", "vehicles", "thing",
    "things", "item", "items", "presence", "present", "of", "is", "are",
    "with", "and", "in", "on", "at", "there", "contains", "containing",
    "has", "have", "one", "some", "any",
}
# words that qualify a region token and are dropped alongside it
_REGION_FILLER = {"lane", "region", "side", "half", "area", "zone", "part", "row"}

_VALUE_SYNONYMS = {
    "ball": ("shape", "sphere"),
    "block": ("shape", "cube"),
    "big": ("size", "large"),
    "tiny": ("size", "small"),
    "metallic": ("material", "metal"),
    "leftmost": ("region", "left"),
    "rightmost": ("region", "right"),
    "left": ("region", "left"),
    "right": ("region", "right"),
    "near": ("region", "near"),
    "nearby": ("region", "near"),
    "front": ("region", "near"),
}


class ConceptError(ValueError):
    """Malformed concept."""


class ContradictionError(ConceptError):
    """Two conjuncts cannot hold of a single object."""


class ArityError(ConceptError):
    """More conjuncts than the grammar allows."""


class OpaqueConceptError(ConceptError):
    """Operation needs a grammar concept but got an opaque one."""


def _value_field(token: str) -> Optional[tuple]:
    for fld, values in ATTR_VALUES.items():
        if token in values:
            return (fld, token)
    if token in _VALUE_SYNONYMS:
        return _VALUE_SYNONYMS[token]
    return None


def cell_in_region(cell: tuple, region: str, grid_w: int, grid_h: int) -> bool:
    col, row = cell
    if region == "left":
        return col < grid_w / 2
    if region == "right":
        return col >= grid_w / 2
    if region == "near":
        return row >= grid_h / 2
    raise ConceptError(f"unknown region {region!r}")


@dataclass(frozen=True)
class Concept:
    """Conjunction of up to three attribute/region predicates, or opaque text.

    Conjuncts are stored canonically sorted, so equal concepts serialize the
    same way and compare equal.
    """

    conjuncts: tuple = ()
    opaque_text: Optional[str] = None

    def __post_init__(self):
        if self.opaque_text is not None:
            if self.conjuncts:
                raise ConceptError("opaque concept cannot carry conjuncts")
            return
        conjs = tuple(sorted(set(self.conjuncts)))
        object.__setattr__(self, "conjuncts", conjs)
        if not conjs:
            raise ConceptError("empty concept")
        if len(conjs) > MAX_CONJUNCTS:
            raise ArityError(f"at most {MAX_CONJUNCTS} conjuncts, got {len(conjs)}")
        seen = {}
        for fld, value in conjs:
            if fld == "region":
                if value not in REGIONS:
                    raise ConceptError(f"unknown region {value!r}")
            elif fld not in ATTR_VALUES:
                raise ConceptError(f"unknown field {fld!r}")
            elif value not in ATTR_VALUES[fld]:
                raise ConceptError(f"unknown {fld} value {value!r}")
            if fld != "region" and fld in seen:
                raise ContradictionError(f"conflicting {fld}: {seen[fld]} vs {value}")
            seen[fld] = value
        regions = {v for f, v in conjs if f == "region"}
        if {"left", "right"} <= regions:
            raise ContradictionError("left and right regions are disjoint")

    def is_opaque(self) -> bool:
        return self.opaque_text is not None

    def to_string(self) -> str:
        if self.is_opaque():
            return f"opaque:{self.opaque_text}"
        return "&".join(f"{f}={v}" for f, v in self.conjuncts)

    def __str__(self) -> str:
        return self.to_string()

    def phrase(self) -> str:
        """Human-readable rendering, e.g. 'red metal object in the left region'."""
        if self.is_opaque():
            return self.opaque_text
        attrs = [v for f, v in self.conjuncts if f != "region"]
        regions = [v for f, v in self.conjuncts if f == "region"]
        words = " ".join(attrs + ["object"]) if attrs else "object"
        for r in regions:
            words += f" in the {r} region"
        return words


def concept(*conjuncts) -> Concept:
    """Shorthand constructor: concept(("color", "red"), ("material", "metal"))."""
    return Concept(conjuncts=tuple(conjuncts))


def opaque(text: str) -> Concept:
    return Concept(opaque_text=text)


def concept_from_string(s: str) -> Concept:
    """Parse the canonical `field=value&...` form; raises on malformed input."""
    s = s.strip()
    if s.startswith("opaque:"):
        return opaque(s[len("opaque:"):])
    parts = [p for p in s.split("&") if p]
    conjs = []
    for part in parts:
        if "=" not in part:
            raise ConceptError(f"malformed conjunct {part!r}")
        fld, _, value = part.partition("=")
        conjs.append((fld.strip(), value.strip()))
    return Concept(conjuncts=tuple(conjs))


def parse_concept(text: str) -> Concept:
    """Total, deterministic parser from free text to the grammar.

    Controlled-vocabulary phrases ("a cyan object", "red metal object",
    "vehicle in the left lane") map to grammar concepts; anything else comes
    back as the opaque variant. Never raises.
    """
    original = text
    s = text.strip().lower()
    s = re.sub(r"^[\s\-\*•\d\.\)]+", "", s)   # bullet/number prefixes
    if "=" in s:
        try:
            return concept_from_string(s)
        except ConceptError:
            return opaque(original.strip())
    s = re.sub(r"[^a-z\s]", " ", s)
    tokens = s.split()
    conjs = []
    for tok in tokens:
        if tok in _FILLER or tok in _REGION_FILLER:
            continue
        mapped = _value_field(tok)
        if mapped is None:
            return opaque(original.strip())
        conjs.append(mapped)
    if not conjs:
        return opaque(original.strip())
    try:
        return Concept(conjuncts=tuple(conjs))
    except ConceptError:
        return opaque(original.strip())


def object_satisfies(obj: SceneObject, c: Concept, grid_w: int, grid_h: int) -> bool:
    if c.is_opaque():
        raise OpaqueConceptError("opaque concept has no object-level semantics")
    for fld, value in c.conjuncts:
        if fld == "region":
            if not cell_in_region(obj.cell(), value, grid_w, grid_h):
                return False
        elif getattr(obj, fld) != value:
            return False
    return True


def eval_concept(scene: Scene, c: Concept) -> bool:
    """Exact presence oracle: true iff some object satisfies every conjunct."""
    if c.is_opaque():
        raise OpaqueConceptError(
            "opaque concepts must be routed to an external presence client"
        )
    return any(object_satisfies(o, c, scene.grid_w, scene.grid_h) for o in scene.objects)


def combine(concepts_: Iterable[Concept]) -> Concept:
    """Canonical conjunction of several concepts.

    Commutative, associative and idempotent at the level of the canonical
    serialized form. Raises on contradictions or arity overflow.
    """
    items = list(concepts_)
    if not items:
        raise ConceptError("nothing to combine")
    conjs = []
    for c in items:
        if c.is_opaque():
            raise OpaqueConceptError(f"cannot combine opaque concept {c.to_string()!r}")
        conjs.extend(c.conjuncts)
    return Concept(conjuncts=tuple(conjs))
