"""Symbolic scene world: attributed objects on a grid, sampling, and interventions.

Scenes stand in for images. Positions are discrete grid cells so occupancy
and equality tests are exact, and every edit is replayable.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

SHAPES = ("cube", "sphere", "cylinder")
COLORS = ("gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow")
MATERIALS = ("metal", "rubber")
SIZES = ("small", "large")

ATTR_FIELDS = ("shape", "color", "material", "size")
ATTR_VALUES = {
    "shape": SHAPES,
    "color": COLORS,
    "material": MATERIALS,
    "size": SIZES,
}

DEFAULT_GRID_W = 8
DEFAULT_GRID_H = 6

EDIT_KINDS = ("add", "move", "recolor", "rematerial", "remove", "reshape", "resize")

# field edited by each attribute edit kind
_KIND_FOR_FIELD = {"color": "recolor", "material": "rematerial", "shape": "reshape", "size": "resize"}
_FIELD_FOR_KIND = {v: k for k, v in _KIND_FOR_FIELD.items()}


class WorldError(ValueError):
    """Invalid world configuration or impossible sampling request."""


class EditError(ValueError):
    """An edit cannot be applied to the given scene."""


@dataclass(frozen=True)
class WorldConfig:
    """Sampling parameters for the scene world."""

    grid_w: int = DEFAULT_GRID_W
    grid_h: int = DEFAULT_GRID_H
    min_objects: int = 3
    max_objects: int = 10
    shapes: Sequence[str] = SHAPES
    colors: Sequence[str] = COLORS
    materials: Sequence[str] = MATERIALS
    sizes: Sequence[str] = SIZES

    def validate(self) -> None:
        if not (3 <= self.min_objects <= self.max_objects <= 10):
            raise WorldError(
                f"object count bounds must satisfy 3 <= min <= max <= 10, "
                f"got [{self.min_objects}, {self.max_objects}]"
            )
        if self.grid_w < 1 or self.grid_h < 1:
            raise WorldError("grid dimensions must be positive")
        if self.grid_w * self.grid_h < self.max_objects:
            raise WorldError("grid too small for the requested object count")
        for name in ("shapes", "colors", "materials", "sizes"):
            values = tuple(getattr(self, name))
            if not values:
                raise WorldError(f"{name} must be nonempty")
            bad = set(values) - set(ATTR_VALUES[name[:-1]])
            if bad:
                raise WorldError(f"unknown {name}: {sorted(bad)}")

    def to_dict(self) -> dict:
        return {
            "grid_w": self.grid_w,
            "grid_h": self.grid_h,
            "min_objects": self.min_objects,
            "max_objects": self.max_objects,
            "shapes": list(self.shapes),
            "colors": list(self.colors),
            "materials": list(self.materials),
            "sizes": list(self.sizes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorldConfig":
        cfg = cls(
            grid_w=int(d.get("grid_w", DEFAULT_GRID_W)),
            grid_h=int(d.get("grid_h", DEFAULT_GRID_H)),
            min_objects=int(d.get("min_objects", 3)),
            max_objects=int(d.get("max_objects", 10)),
            shapes=tuple(d.get("shapes", SHAPES)),
            colors=tuple(d.get("colors", COLORS)),
            materials=tuple(d.get("materials", MATERIALS)),
            sizes=tuple(d.get("sizes", SIZES)),
        )
        cfg.validate()
        return cfg


@dataclass(frozen=True, order=True)
class SceneObject:
    """One attributed object occupying a single grid cell."""

    col: int
    row: int
    shape: str
    color: str
    material: str
    size: str

    def attrs(self) -> tuple:
        return (self.shape, self.color, self.material, self.size)

    def cell(self) -> tuple:
        return (self.col, self.row)

    def describe(self) -> str:
        return f"{self.size} {self.color} {self.material} {self.shape} at ({self.col}, {self.row})"

    def to_dict(self) -> dict:
        return {
            "col": self.col,
            "row": self.row,
            "shape": self.shape,
            "color": self.color,
            "material": self.material,
            "size": self.size,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneObject":
        return cls(
            col=int(d["col"]),
            row=int(d["row"]),
            shape=d["shape"],
            color=d["color"],
            material=d["material"],
            size=d["size"],
        )


@dataclass(frozen=True)
class Scene:
    """An immutable arrangement of objects on a grid.

    Objects are kept in canonical order (position-major), so two scenes with
    the same objects compare equal and hash to the same id regardless of the
    order they were supplied in.
    """

    objects: tuple = ()
    grid_w: int = DEFAULT_GRID_W
    grid_h: int = DEFAULT_GRID_H

    def __post_init__(self):
        objs = tuple(sorted(self.objects))
        object.__setattr__(self, "objects", objs)
        cells = set()
        for o in objs:
            if not (0 <= o.col < self.grid_w and 0 <= o.row < self.grid_h):
                raise WorldError(f"object out of grid bounds: {o}")
            if o.cell() in cells:
                raise WorldError(f"two objects share cell {o.cell()}")
            cells.add(o.cell())

    def key(self) -> tuple:
        """Cheap hashable identity used by searches (no hashing overhead)."""
        return (self.grid_w, self.grid_h, self.objects)

    @property
    def id(self) -> str:
        digest = hashlib.sha256(canonical_json(self.to_dict()).encode("utf-8"))
        return digest.hexdigest()[:16]

    def free_cells(self) -> list:
        occupied = {o.cell() for o in self.objects}
        return [
            (c, r)
            for c in range(self.grid_w)
            for r in range(self.grid_h)
            if (c, r) not in occupied
        ]

    def to_dict(self) -> dict:
        return {
            "grid_w": self.grid_w,
            "grid_h": self.grid_h,
            "objects": [o.to_dict() for o in self.objects],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scene":
        return cls(
            objects=tuple(SceneObject.from_dict(o) for o in d["objects"]),
            grid_w=int(d["grid_w"]),
            grid_h=int(d["grid_h"]),
        )


def canonical_json(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Edit:
    """One primitive scene edit with its before/after object descriptors."""

    kind: str
    before: Optional[SceneObject] = None
    after: Optional[SceneObject] = None

    def __post_init__(self):
        if self.kind not in EDIT_KINDS:
            raise EditError(f"unknown edit kind {self.kind!r}")
        if self.kind == "add":
            if self.before is not None or self.after is None:
                raise EditError("add edit needs after only")
        elif self.kind == "remove":
            if self.before is None or self.after is not None:
                raise EditError("remove edit needs before only")
        else:
            if self.before is None or self.after is None:
                raise EditError(f"{self.kind} edit needs before and after")
            if self.kind == "move":
                if self.before.attrs() != self.after.attrs() or self.before.cell() == self.after.cell():
                    raise EditError("move edit must change position only")
            else:
                fld = _FIELD_FOR_KIND[self.kind]
                changed = [f for f in ATTR_FIELDS if getattr(self.before, f) != getattr(self.after, f)]
                if changed != [fld] or self.before.cell() != self.after.cell():
                    raise EditError(f"{self.kind} edit must change {fld} only")

    def sort_key(self, scene: "Scene") -> tuple:
        if self.before is not None:
            try:
                idx = scene.objects.index(self.before)
            except ValueError:
                idx = len(scene.objects)
        else:
            idx = len(scene.objects)
        value = self.after.describe() if self.after is not None else ""
        return (self.kind, idx, value)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "before": self.before.to_dict() if self.before else None,
            "after": self.after.to_dict() if self.after else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Edit":
        return cls(
            kind=d["kind"],
            before=SceneObject.from_dict(d["before"]) if d.get("before") else None,
            after=SceneObject.from_dict(d["after"]) if d.get("after") else None,
        )


def apply_edit(scene: Scene, edit: Edit) -> Scene:
    """Apply one primitive edit, preserving every untouched object bit-exactly."""
    objs = list(scene.objects)
    if edit.kind == "add":
        occupied = {o.cell() for o in objs}
        if edit.after.cell() in occupied:
            raise EditError(f"cell {edit.after.cell()} is occupied")
        objs.append(edit.after)
    else:
        if edit.before not in objs:
            raise EditError(f"object not in scene: {edit.before}")
        objs.remove(edit.before)
        if edit.after is not None:
            occupied = {o.cell() for o in objs}
            if edit.after.cell() in occupied:
                raise EditError(f"cell {edit.after.cell()} is occupied")
            objs.append(edit.after)
    return Scene(objects=tuple(objs), grid_w=scene.grid_w, grid_h=scene.grid_h)


def replay_trace(scene: Scene, trace: Iterable[Edit]) -> Scene:
    for edit in trace:
        scene = apply_edit(scene, edit)
    return scene


def sample_scene(rng_seed: int, params: Optional[WorldConfig] = None) -> Scene:
    """Draw a scene with a uniform object count, free-cell positions and attributes.

    Identical seed and params yield an identical scene.
    """
    params = params or WorldConfig()
    params.validate()
    rng = random.Random(rng_seed)
    count = rng.randint(params.min_objects, params.max_objects)
    all_cells = [(c, r) for c in range(params.grid_w) for r in range(params.grid_h)]
    cells = rng.sample(all_cells, count)
    objects = []
    for col, row in cells:
        objects.append(
            SceneObject(
                col=col,
                row=row,
                shape=rng.choice(tuple(params.shapes)),
                color=rng.choice(tuple(params.colors)),
                material=rng.choice(tuple(params.materials)),
                size=rng.choice(tuple(params.sizes)),
            )
        )
    return Scene(objects=tuple(objects), grid_w=params.grid_w, grid_h=params.grid_h)


def edit_add(scene: Scene, concept, rng_seed: int, params: Optional[WorldConfig] = None) -> Scene:
    """Add exactly one object satisfying `concept`; all prior objects unchanged.

    Constrained attributes come from the concept; unconstrained ones and the
    placement cell are drawn uniformly from the seeded stream. Placement
    respects any region conjuncts.
    """
    from . import concepts as _concepts

    if concept.is_opaque():
        raise _concepts.OpaqueConceptError("cannot edit with an opaque concept")
    params = params or WorldConfig(grid_w=scene.grid_w, grid_h=scene.grid_h)
    rng = random.Random(rng_seed)
    region_conjuncts = [(f, v) for f, v in concept.conjuncts if f == "region"]
    candidates = [
        cell
        for cell in scene.free_cells()
        if all(_concepts.cell_in_region(cell, v, scene.grid_w, scene.grid_h) for _, v in region_conjuncts)
    ]
    if not candidates:
        raise EditError("no free cell satisfies the concept")
    col, row = rng.choice(candidates)
    fixed = {f: v for f, v in concept.conjuncts if f != "region"}
    obj = SceneObject(
        col=col,
        row=row,
        shape=fixed.get("shape", rng.choice(tuple(params.shapes))),
        color=fixed.get("color", rng.choice(tuple(params.colors))),
        material=fixed.get("material", rng.choice(tuple(params.materials))),
        size=fixed.get("size", rng.choice(tuple(params.sizes))),
    )
    return apply_edit(scene, Edit(kind="add", after=obj))


def edit_remove(scene: Scene, concept) -> Scene:
    """Remove every object satisfying `concept` (flips its presence to false)."""
    from . import concepts as _concepts

    if concept.is_opaque():
        raise _concepts.OpaqueConceptError("cannot edit with an opaque concept")
    keep = tuple(
        o
        for o in scene.objects
        if not _concepts.object_satisfies(o, concept, scene.grid_w, scene.grid_h)
    )
    return Scene(objects=keep, grid_w=scene.grid_w, grid_h=scene.grid_h)
