import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulelens.concepts import OpaqueConceptError, concept_from_string, eval_concept, opaque
from rulelens.scene import (
    ATTR_VALUES,
    Edit,
    EditError,
    Scene,
    SceneObject,
    WorldConfig,
    apply_edit,
    edit_add,
    edit_remove,
    replay_trace,
    sample_scene,
)


def obj(col, row, shape="cube", color="red", material="metal", size="small"):
    return SceneObject(col=col, row=row, shape=shape, color=color, material=material, size=size)


def test_sample_scene_deterministic():
    a = sample_scene(0)
    b = sample_scene(0)
    assert a.id == b.id
    assert a == b


def test_sample_scene_different_seeds_differ():
    assert sample_scene(0) != sample_scene(1)


def test_sample_scene_forced_count():
    cfg = WorldConfig(min_objects=3, max_objects=3)
    assert len(sample_scene(5, cfg).objects) == 3


@pytest.mark.parametrize("lo,hi", [(2, 5), (3, 11), (5, 4), (0, 0)])
def test_sample_scene_invalid_counts(lo, hi):
    with pytest.raises(Exception):
        cfg = WorldConfig(min_objects=lo, max_objects=hi)
        sample_scene(0, cfg)


def test_sample_scene_valid_over_many_seeds():
    for seed in range(200):
        scene = sample_scene(seed)
        assert 3 <= len(scene.objects) <= 10
        cells = [o.cell() for o in scene.objects]
        assert len(cells) == len(set(cells))
        for o in scene.objects:
            assert 0 <= o.col < scene.grid_w and 0 <= o.row < scene.grid_h


def test_attribute_frequencies_within_three_sigma_of_uniform():
    # exact multinomial check: each attribute value count within 3 sigma of
    # its uniform expectation over all objects from 10000 seeded samples
    counts = {fld: {v: 0 for v in values} for fld, values in ATTR_VALUES.items()}
    total = 0
    for seed in range(10_000):
        for o in sample_scene(seed).objects:
            total += 1
            for fld in counts:
                counts[fld][getattr(o, fld)] += 1
    for fld, values in ATTR_VALUES.items():
        p = 1.0 / len(values)
        mean = total * p
        sigma = (total * p * (1 - p)) ** 0.5
        for v in values:
            assert abs(counts[fld][v] - mean) <= 3 * sigma, (fld, v, counts[fld][v], mean)


def test_scene_id_invariant_under_object_permutation():
    objs = [obj(0, 0), obj(3, 2, color="blue"), obj(5, 4, shape="sphere")]
    a = Scene(objects=tuple(objs))
    b = Scene(objects=tuple(reversed(objs)))
    assert a.id == b.id
    assert a.objects == b.objects


def test_scene_rejects_shared_cell():
    with pytest.raises(Exception):
        Scene(objects=(obj(1, 1), obj(1, 1, color="blue")))


def test_scene_rejects_out_of_bounds():
    with pytest.raises(Exception):
        Scene(objects=(obj(8, 0),), grid_w=8, grid_h=6)


def test_edit_add_satisfies_concept_and_preserves_rest():
    scene = Scene(objects=(obj(0, 0, color="red"), obj(1, 1, color="blue"), obj(2, 2, color="green")))
    cyan = concept_from_string("color=cyan")
    assert not eval_concept(scene, cyan)
    out = edit_add(scene, cyan, rng_seed=3)
    assert eval_concept(out, cyan)
    assert len(out.objects) == len(scene.objects) + 1
    assert set(scene.objects) <= set(out.objects)


def test_edit_add_projects_all_constraints():
    scene = sample_scene(11, WorldConfig(colors=("blue",), materials=("rubber",)))
    c = concept_from_string("color=red&material=metal")
    out = edit_add(scene, c, rng_seed=0)
    added = (set(out.objects) - set(scene.objects)).pop()
    assert added.color == "red" and added.material == "metal"


def test_edit_add_region_concept_places_in_region():
    # predicate-evaluation oracle: the added object's column is in the left half
    c = concept_from_string("region=left")
    for seed in range(25):
        scene = sample_scene(seed)
        out = edit_add(scene, c, rng_seed=seed)
        added = (set(out.objects) - set(scene.objects)).pop()
        assert added.col < scene.grid_w / 2


def test_edit_add_unconstrained_attributes_vary_with_seed():
    scene = Scene(objects=(obj(0, 0), obj(1, 1), obj(2, 2)))
    c = concept_from_string("color=cyan")
    added = {
        (set(edit_add(scene, c, rng_seed=s).objects) - set(scene.objects)).pop().shape
        for s in range(40)
    }
    assert len(added) > 1  # shape is seeded-random, not fixed


def test_edit_add_no_free_cell_error():
    full = Scene(
        objects=tuple(obj(c, r, color="blue") for c in range(3) for r in range(3)),
        grid_w=3, grid_h=3)
    with pytest.raises(EditError):
        edit_add(full, concept_from_string("color=red"), rng_seed=0)


def test_edit_add_region_full_raises_even_with_free_cells_elsewhere():
    # left half full, right half has room: a left-region add must fail
    left_full = Scene(
        objects=tuple(obj(c, r, color="blue") for c in range(2) for r in range(3)),
        grid_w=4, grid_h=3)
    with pytest.raises(EditError):
        edit_add(left_full, concept_from_string("color=red&region=left"), rng_seed=0)


def test_edit_with_opaque_concept_errors():
    scene = sample_scene(0)
    with pytest.raises(OpaqueConceptError):
        edit_add(scene, opaque("dense traffic"), rng_seed=0)
    with pytest.raises(OpaqueConceptError):
        edit_remove(scene, opaque("dense traffic"))


def test_edit_remove_removes_all_matching():
    scene = Scene(objects=(obj(0, 0, color="cyan"), obj(5, 5, color="cyan"), obj(2, 2, color="red")))
    out = edit_remove(scene, concept_from_string("color=cyan"))
    assert not eval_concept(out, concept_from_string("color=cyan"))
    assert len(out.objects) == 1


def test_edit_remove_no_match_is_identity():
    scene = sample_scene(3, WorldConfig(colors=("blue", "green")))
    out = edit_remove(scene, concept_from_string("color=red"))
    assert out == scene


def test_edit_remove_conjunction_removes_only_full_matches():
    # enumerate matches by hand: only the red metal object satisfies both
    scene = Scene(objects=(
        obj(0, 0, color="red", material="metal"),
        obj(1, 1, color="red", material="rubber"),
        obj(2, 2, color="blue", material="metal"),
    ))
    out = edit_remove(scene, concept_from_string("color=red&material=metal"))
    assert len(out.objects) == 2
    assert obj(1, 1, color="red", material="rubber") in out.objects
    assert obj(2, 2, color="blue", material="metal") in out.objects


def test_edit_remove_idempotent():
    c = concept_from_string("material=metal")
    for seed in range(20):
        scene = sample_scene(seed)
        once = edit_remove(scene, c)
        assert edit_remove(once, c) == once


def test_edit_remove_may_go_below_sampling_floor():
    scene = sample_scene(1, WorldConfig(min_objects=3, max_objects=3, colors=("cyan",)))
    out = edit_remove(scene, concept_from_string("color=cyan"))
    assert len(out.objects) == 0


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=60, deadline=None)
def test_add_then_remove_restores_absence(seed):
    scene = sample_scene(seed)
    c = concept_from_string("color=purple&material=metal")
    grown = edit_add(scene, c, rng_seed=seed)
    cleared = edit_remove(grown, c)
    assert not eval_concept(cleared, c)


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=60, deadline=None)
def test_edits_preserve_non_matching_objects_bit_exactly(seed):
    scene = sample_scene(seed)
    c = concept_from_string("color=cyan")
    non_matching = {o for o in scene.objects if o.color != "cyan"}
    after_remove = edit_remove(scene, c)
    assert non_matching == set(after_remove.objects)
    after_add = edit_add(scene, c, rng_seed=seed)
    assert set(scene.objects) <= set(after_add.objects)


def test_apply_edit_and_replay_trace():
    scene = Scene(objects=(obj(0, 0), obj(1, 1, color="blue"), obj(2, 2, color="green")))
    e1 = Edit(kind="recolor", before=obj(0, 0),
              after=obj(0, 0, color="yellow"))
    e2 = Edit(kind="remove", before=obj(1, 1, color="blue"))
    e3 = Edit(kind="add", after=obj(7, 5, color="cyan"))
    target = replay_trace(scene, [e1, e2, e3])
    assert obj(0, 0, color="yellow") in target.objects
    assert obj(7, 5, color="cyan") in target.objects
    assert len(target.objects) == 3


def test_apply_edit_occupied_cell_rejected():
    scene = Scene(objects=(obj(0, 0), obj(1, 1, color="blue"), obj(2, 2, color="green")))
    with pytest.raises(EditError):
        apply_edit(scene, Edit(kind="add", after=obj(1, 1, color="cyan")))


def test_scene_json_round_trip():
    scene = sample_scene(42)
    assert Scene.from_dict(scene.to_dict()) == scene
