"""Change captioning: scene diffs, deterministic English rendering, the
inverse parser, a seeded corruption model, and whole-scene captions for the
independent-caption ablation.

The caption grammar is a fixed template set, so the summarizing stage can be
exercised without any language model; noisy captioners are simulated by
`corrupt_caption` and, for real endpoints, by the wire client.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

from .scene import (
    ATTR_FIELDS,
    ATTR_VALUES,
    COLORS,
    DEFAULT_GRID_H,
    DEFAULT_GRID_W,
    MATERIALS,
    SHAPES,
    SIZES,
    Scene,
    SceneObject,
)

EVENT_KINDS = ("appeared", "disappeared", "attribute_changed", "moved")

NO_CHANGE_LINE = "no visible change"
EMPTY_SCENE_LINE = "an empty scene"

# minimum shared attributes for two objects to be matched as "the same
# object, changed"; below this a deletion plus an insertion is reported
MATCH_OVERLAP_THRESHOLD = 2


@dataclass(frozen=True)
class ChangeEvent:
    """One atomic difference between two scenes."""

    kind: str
    before: Optional[SceneObject] = None
    after: Optional[SceneObject] = None
    changed_field: Optional[str] = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.kind == "appeared":
            assert self.before is None and self.after is not None
        elif self.kind == "disappeared":
            assert self.before is not None and self.after is None
        elif self.kind == "moved":
            assert self.before is not None and self.after is not None
            assert self.before.attrs() == self.after.attrs()
            assert self.before.cell() != self.after.cell()
        else:
            assert self.before is not None and self.after is not None
            changed = [
                f for f in ATTR_FIELDS
                if getattr(self.before, f) != getattr(self.after, f)
            ]
            if len(changed) != 1 or changed[0] != self.changed_field:
                raise ValueError("attribute_changed must alter exactly the changed_field")
            assert self.before.cell() == self.after.cell()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "before": self.before.to_dict() if self.before else None,
            "after": self.after.to_dict() if self.after else None,
            "changed_field": self.changed_field,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChangeEvent":
        return cls(
            kind=d["kind"],
            before=SceneObject.from_dict(d["before"]) if d.get("before") else None,
            after=SceneObject.from_dict(d["after"]) if d.get("after") else None,
            changed_field=d.get("changed_field"),
        )


@dataclass(frozen=True)
class ChangeCaption:
    """Rendered change description plus the decision flip it accompanied.

    For oracle captions `rendered` is exactly the rendering of `events`; for
    corrupted captions `rendered` is the noisy text and `events` its
    best-effort parse.
    """

    events: tuple
    rendered: str
    direction: tuple  # (from_label, to_label)

    def to_dict(self) -> dict:
        return {
            "events": [e.to_dict() for e in self.events],
            "rendered": self.rendered,
            "from_label": self.direction[0],
            "to_label": self.direction[1],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChangeCaption":
        return cls(
            events=tuple(ChangeEvent.from_dict(e) for e in d["events"]),
            rendered=d["rendered"],
            direction=(int(d["from_label"]), int(d["to_label"])),
        )


def _shared_attrs(a: SceneObject, b: SceneObject) -> int:
    return sum(1 for f in ATTR_FIELDS if getattr(a, f) == getattr(b, f))


def diff_scenes(source: Scene, target: Scene) -> List[ChangeEvent]:
    """Complete, replayable delta between two scenes.

    Objects are matched greedily by maximal attribute overlap (position as a
    tie-break); pairs sharing fewer than MATCH_OVERLAP_THRESHOLD attributes
    are reported as a disappearance plus an appearance. A matched pair emits
    one attribute_changed event per differing field (chained, in canonical
    field order) and a final moved event if the position differs.
    """
    src_set = set(source.objects)
    tgt_set = set(target.objects)
    rest_src = [o for o in source.objects if o not in tgt_set]
    rest_tgt = [o for o in target.objects if o not in src_set]

    candidates = []
    for a in rest_src:
        for b in rest_tgt:
            shared = _shared_attrs(a, b)
            if shared >= MATCH_OVERLAP_THRESHOLD:
                lo, hi = sorted((a, b))
                candidates.append((-shared, 0 if a.cell() == b.cell() else 1, lo, hi, a, b))
    candidates.sort()

    used_src: set = set()
    used_tgt: set = set()
    matched = []
    for _, _, _, _, a, b in candidates:
        if a in used_src or b in used_tgt:
            continue
        used_src.add(a)
        used_tgt.add(b)
        matched.append((a, b))
    matched.sort(key=lambda ab: ab[0])

    events: List[ChangeEvent] = []
    for a, b in matched:
        current = a
        for fld in ATTR_FIELDS:
            if getattr(current, fld) != getattr(b, fld):
                after = _with_field(current, fld, getattr(b, fld))
                events.append(ChangeEvent(kind="attribute_changed", before=current,
                                          after=after, changed_field=fld))
                current = after
        if current.cell() != b.cell():
            events.append(ChangeEvent(kind="moved", before=current, after=b))
    for o in sorted(o for o in rest_src if o not in used_src):
        events.append(ChangeEvent(kind="disappeared", before=o))
    for o in sorted(o for o in rest_tgt if o not in used_tgt):
        events.append(ChangeEvent(kind="appeared", after=o))
    return events


def _with_field(obj: SceneObject, fld: str, value: str) -> SceneObject:
    kwargs = {"col": obj.col, "row": obj.row, "shape": obj.shape,
              "color": obj.color, "material": obj.material, "size": obj.size}
    kwargs[fld] = value
    return SceneObject(**kwargs)


def _describe(obj: SceneObject) -> str:
    return f"{obj.size} {obj.color} {obj.material} {obj.shape}"


def render_event(event: ChangeEvent) -> str:
    if event.kind == "appeared":
        o = event.after
        return f"a {_describe(o)} appeared at ({o.col}, {o.row})"
    if event.kind == "disappeared":
        o = event.before
        return f"the {_describe(o)} at ({o.col}, {o.row}) disappeared"
    if event.kind == "moved":
        b, a = event.before, event.after
        return (f"the {_describe(b)} moved from ({b.col}, {b.row}) "
                f"to ({a.col}, {a.row})")
    b = event.before
    new = getattr(event.after, event.changed_field)
    head = f"the {_describe(b)} at ({b.col}, {b.row})"
    if event.changed_field == "color":
        return f"{head} turned {new}"
    if event.changed_field == "shape":
        return f"{head} turned into a {new}"
    return f"{head} became {new}"


def caption_changes(events: Iterable[ChangeEvent], direction: tuple) -> ChangeCaption:
    """One English line per event from the fixed template set."""
    events = tuple(events)
    lines = [render_event(e) for e in events]
    rendered = "\n".join(lines) if lines else NO_CHANGE_LINE
    return ChangeCaption(events=events, rendered=rendered, direction=tuple(direction))


_DESC = r"(\w+) (\w+) (\w+) (\w+)"
_CELL = r"\((\d+), (\d+)\)"
_RE_APPEARED = re.compile(rf"^a {_DESC} appeared at {_CELL}$")
_RE_DISAPPEARED = re.compile(rf"^the {_DESC} at {_CELL} disappeared$")
_RE_MOVED = re.compile(rf"^the {_DESC} moved from {_CELL} to {_CELL}$")
_RE_SHAPE = re.compile(rf"^the {_DESC} at {_CELL} turned into a (\w+)$")
_RE_COLOR = re.compile(rf"^the {_DESC} at {_CELL} turned (\w+)$")
_RE_BECAME = re.compile(rf"^the {_DESC} at {_CELL} became (\w+)$")
_RE_OBJECT_LINE = re.compile(rf"^a {_DESC} at {_CELL}$")


def _object_from_groups(size, color, material, shape, col, row) -> Optional[SceneObject]:
    if (size in SIZES and color in COLORS and material in MATERIALS and shape in SHAPES):
        return SceneObject(col=int(col), row=int(row), shape=shape,
                           color=color, material=material, size=size)
    return None


def parse_line(line: str) -> Optional[ChangeEvent]:
    """Parse one caption line; None when the line is not a valid template."""
    line = line.strip()
    m = _RE_APPEARED.match(line)
    if m:
        obj = _object_from_groups(*m.groups())
        return ChangeEvent(kind="appeared", after=obj) if obj else None
    m = _RE_DISAPPEARED.match(line)
    if m:
        obj = _object_from_groups(*m.groups())
        return ChangeEvent(kind="disappeared", before=obj) if obj else None
    m = _RE_MOVED.match(line)
    if m:
        size, color, material, shape, c1, r1, c2, r2 = m.groups()
        before = _object_from_groups(size, color, material, shape, c1, r1)
        after = _object_from_groups(size, color, material, shape, c2, r2)
        if before and after and before.cell() != after.cell():
            return ChangeEvent(kind="moved", before=before, after=after)
        return None
    m = _RE_SHAPE.match(line)
    if m:
        return _attr_event(m, "shape")
    m = _RE_COLOR.match(line)
    if m:
        return _attr_event(m, "color")
    m = _RE_BECAME.match(line)
    if m:
        new = m.group(7)
        if new in MATERIALS:
            return _attr_event(m, "material")
        if new in SIZES:
            return _attr_event(m, "size")
        return None
    return None


def _attr_event(m, fld: str) -> Optional[ChangeEvent]:
    size, color, material, shape, col, row, new = m.groups()
    before = _object_from_groups(size, color, material, shape, col, row)
    if before is None or new not in ATTR_VALUES[fld] or new == getattr(before, fld):
        return None
    return ChangeEvent(kind="attribute_changed", before=before,
                       after=_with_field(before, fld, new), changed_field=fld)


def parse_caption(text: str) -> Tuple[List[ChangeEvent], List[str]]:
    """Inverse of `caption_changes` on uncorrupted output.

    Returns (events, residue); lines that are not valid template output come
    back verbatim in the residue instead of raising.
    """
    events: List[ChangeEvent] = []
    residue: List[str] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line == NO_CHANGE_LINE:
            continue
        event = parse_line(line)
        if event is None:
            residue.append(line)
        else:
            events.append(event)
    return events, residue


_LEXICONS = {"shape": SHAPES, "color": COLORS, "material": MATERIALS, "size": SIZES}


def _swap_one_token(line: str, rng: random.Random) -> str:
    tokens = line.split(" ")
    slots = []
    for i, tok in enumerate(tokens):
        for fld, values in _LEXICONS.items():
            if tok in values:
                slots.append((i, fld))
                break
    if not slots:
        return line
    i, fld = rng.choice(slots)
    alternatives = [v for v in _LEXICONS[fld] if v != tokens[i]]
    tokens[i] = rng.choice(alternatives)
    return " ".join(tokens)


def _spurious_line(rng: random.Random, grid_w: int, grid_h: int) -> str:
    obj = SceneObject(
        col=rng.randrange(grid_w),
        row=rng.randrange(grid_h),
        shape=rng.choice(SHAPES),
        color=rng.choice(COLORS),
        material=rng.choice(MATERIALS),
        size=rng.choice(SIZES),
    )
    return render_event(ChangeEvent(kind="appeared", after=obj))


def corrupt_caption(
    caption: ChangeCaption,
    noise: dict,
    seed: int,
    grid_w: int = DEFAULT_GRID_W,
    grid_h: int = DEFAULT_GRID_H,
) -> ChangeCaption:
    """Seeded caption-noise model simulating an imperfect captioner.

    Each line is independently dropped with probability p_drop; each
    surviving line gets one attribute token swapped with probability p_swap;
    one spurious (but well-formed) line is appended with probability
    p_spurious. Zero noise is the identity.
    """
    p_drop = float(noise.get("p_drop", 0.0))
    p_swap = float(noise.get("p_swap", 0.0))
    p_spurious = float(noise.get("p_spurious", 0.0))
    for name, p in (("p_drop", p_drop), ("p_swap", p_swap), ("p_spurious", p_spurious)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {p}")

    rng = random.Random(seed)
    lines = []
    for event in caption.events:
        if rng.random() < p_drop:
            continue
        line = render_event(event)
        if rng.random() < p_swap:
            line = _swap_one_token(line, rng)
        lines.append(line)
    if rng.random() < p_spurious:
        lines.append(_spurious_line(rng, grid_w, grid_h))

    rendered = "\n".join(lines) if lines else NO_CHANGE_LINE
    events, _residue = parse_caption(rendered)
    return ChangeCaption(events=tuple(events), rendered=rendered, direction=caption.direction)


def independent_caption(scene: Scene) -> str:
    """Whole-scene description, one line per object, no pairwise information."""
    if not scene.objects:
        return EMPTY_SCENE_LINE
    return "\n".join(f"a {_describe(o)} at ({o.col}, {o.row})" for o in scene.objects)


def parse_object_line(line: str) -> Optional[SceneObject]:
    """Parse one `independent_caption` line back to its object descriptor."""
    m = _RE_OBJECT_LINE.match(line.strip())
    if not m:
        return None
    return _object_from_groups(*m.groups())


# the external change captioner lives with the other wire clients
from .wire import vlm_change_caption  # noqa: E402,F401
