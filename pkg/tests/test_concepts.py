import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulelens.concepts import (
    ArityError,
    Concept,
    ConceptError,
    ContradictionError,
    OpaqueConceptError,
    cell_in_region,
    combine,
    concept,
    concept_from_string,
    eval_concept,
    object_satisfies,
    parse_concept,
)
from rulelens.scene import Scene, SceneObject, sample_scene


def obj(col, row, shape="cube", color="red", material="metal", size="small"):
    return SceneObject(col=col, row=row, shape=shape, color=color, material=material, size=size)


# ------------------------------------------------------------------ parsing

def test_parse_single_color():
    assert parse_concept("cyan object").to_string() == "color=cyan"


def test_parse_two_attribute_phrase():
    assert parse_concept("yellow rubber object").to_string() == "color=yellow&material=rubber"


def test_parse_out_of_vocabulary_is_opaque():
    c = parse_concept("dense traffic in left lane")
    assert c.is_opaque()
    assert c.opaque_text == "dense traffic in left lane"


def test_parse_region_phrases():
    assert parse_concept("vehicle in the left lane").to_string() == "region=left"
    assert parse_concept("object in the left region").to_string() == "region=left"
    assert parse_concept("an object on the right side").to_string() == "region=right"


def test_parse_presence_wrapper():
    assert parse_concept("presence of a red object").to_string() == "color=red"


def test_parse_synonyms():
    assert parse_concept("red metal ball").to_string() == "color=red&material=metal&shape=sphere"
    assert parse_concept("big blue block").to_string() == "color=blue&shape=cube&size=large"


def test_parse_bullet_prefix_stripped():
    assert parse_concept("- a purple object").to_string() == "color=purple"


def test_parse_contradiction_is_opaque():
    assert parse_concept("red blue object").is_opaque()


def test_parse_too_many_conjuncts_is_opaque():
    assert parse_concept("small red metal cube").is_opaque()


def test_parse_canonical_string_form():
    assert parse_concept("material=metal&color=red").to_string() == "color=red&material=metal"


@given(st.text(max_size=60))
@settings(max_examples=200, deadline=None)
def test_parse_is_total_and_deterministic(text):
    a = parse_concept(text)
    b = parse_concept(text)
    assert a == b
    assert isinstance(a, Concept)


# ------------------------------------------------------- canonical form

def test_conjunct_order_is_canonical():
    a = concept(("material", "metal"), ("color", "red"))
    b = concept(("color", "red"), ("material", "metal"))
    assert a == b
    assert a.to_string() == b.to_string() == "color=red&material=metal"


def test_string_round_trip():
    for s in ("color=cyan", "color=red&material=metal", "region=left",
              "color=yellow&region=near&shape=sphere"):
        assert concept_from_string(s).to_string() == s


def test_constructor_rejects_contradiction_and_overflow():
    with pytest.raises(ContradictionError):
        concept(("color", "red"), ("color", "blue"))
    with pytest.raises(ContradictionError):
        concept(("region", "left"), ("region", "right"))
    with pytest.raises(ArityError):
        concept(("color", "red"), ("material", "metal"), ("shape", "cube"), ("size", "small"))
    with pytest.raises(ConceptError):
        concept(("color", "turquoise"))


def test_compatible_region_pair_allowed():
    c = concept(("region", "left"), ("region", "near"))
    assert c.to_string() == "region=left&region=near"


# ------------------------------------------------------------------ eval

def test_eval_true_when_single_object_satisfies_all():
    scene = Scene(objects=(obj(0, 0, color="red", material="metal"), obj(1, 1, color="blue"), obj(2, 2)))
    assert eval_concept(scene, concept_from_string("color=red&material=metal"))


def test_eval_empty_scene_false():
    assert not eval_concept(Scene(objects=()), concept_from_string("color=red"))


def test_eval_requires_one_object_to_satisfy_jointly():
    # per-object brute force: no single object is both red and metal
    scene = Scene(objects=(
        obj(0, 0, color="red", material="rubber"),
        obj(1, 1, color="blue", material="metal"),
        obj(2, 2, color="green", material="rubber"),
    ))
    c = concept_from_string("color=red&material=metal")
    brute = any(
        all(getattr(o, f) == v for f, v in c.conjuncts) for o in scene.objects
    )
    assert brute is False
    assert eval_concept(scene, c) is False


def test_eval_region_semantics():
    scene = Scene(objects=(obj(1, 0), obj(6, 5, color="blue"), obj(4, 1, color="green")), grid_w=8, grid_h=6)
    assert eval_concept(scene, concept_from_string("region=left"))
    assert eval_concept(scene, concept_from_string("region=right"))
    assert eval_concept(scene, concept_from_string("region=near"))
    only_far_left = Scene(objects=(obj(0, 0),), grid_w=8, grid_h=6)
    assert not eval_concept(only_far_left, concept_from_string("region=near"))
    assert not eval_concept(only_far_left, concept_from_string("region=right"))


def test_eval_matches_per_object_oracle_on_random_scenes():
    concepts = [
        concept_from_string(s) for s in
        ("color=cyan", "material=metal", "color=red&material=metal",
         "region=left", "color=yellow&region=near", "shape=sphere&size=large")
    ]
    for seed in range(40):
        scene = sample_scene(seed)
        for c in concepts:
            brute = any(
                object_satisfies(o, c, scene.grid_w, scene.grid_h) for o in scene.objects
            )
            assert eval_concept(scene, c) == brute


def test_eval_opaque_raises():
    with pytest.raises(OpaqueConceptError):
        eval_concept(sample_scene(0), parse_concept("glorp"))


def test_cell_in_region_partition():
    for col, row in itertools.product(range(8), range(6)):
        left = cell_in_region((col, row), "left", 8, 6)
        right = cell_in_region((col, row), "right", 8, 6)
        assert left != right  # exact partition of the grid


# ------------------------------------------------------------------ combine

def test_combine_builds_conjunction():
    c = combine([parse_concept("red object"), parse_concept("metal object")])
    assert c.to_string() == "color=red&material=metal"


def test_combine_idempotent_on_duplicates():
    c = parse_concept("cyan object")
    assert combine([c, c]) == c


def test_combine_contradiction_errors():
    with pytest.raises(ContradictionError):
        combine([parse_concept("red object"), parse_concept("blue object")])


def test_combine_arity_overflow_errors():
    with pytest.raises(ArityError):
        combine([
            parse_concept("red object"), parse_concept("metal object"),
            parse_concept("cube"), parse_concept("small object"),
        ])


def test_combine_opaque_errors():
    with pytest.raises(OpaqueConceptError):
        combine([parse_concept("red object"), parse_concept("flurb")])


_LEAVES = [("color", "red"), ("material", "metal"), ("region", "near"), ("shape", "cube")]


@given(st.lists(st.sampled_from(_LEAVES), min_size=1, max_size=3),
       st.lists(st.sampled_from(_LEAVES), min_size=1, max_size=3))
@settings(max_examples=100, deadline=None)
def test_combine_commutative_associative_idempotent(leaves_a, leaves_b):
    a = Concept(conjuncts=tuple(set(leaves_a)))
    b = Concept(conjuncts=tuple(set(leaves_b)))
    try:
        ab = combine([a, b])
    except ConceptError:
        return
    ba = combine([b, a])
    assert ab.to_string() == ba.to_string()
    assert combine([ab, a]).to_string() == ab.to_string()
    assert combine([ab, ab]).to_string() == ab.to_string()


def test_phrase_rendering():
    assert parse_concept("red metal object").phrase() == "red metal object"
    assert concept_from_string("region=left").phrase() == "object in the left region"


_OBJECT_CONCEPTS = [
    "color=cyan", "color=purple", "material=metal", "material=rubber",
    "shape=sphere", "size=large", "color=red&material=metal",
    "color=yellow&material=rubber", "region=left", "region=near",
    "color=green&region=right", "material=metal&region=near&shape=cube",
]


@given(seed=st.integers(0, 5000), concept_str=st.sampled_from(_OBJECT_CONCEPTS))
@settings(max_examples=120, deadline=None)
def test_edit_presence_invariant_for_sampled_concepts(seed, concept_str):
    from rulelens.scene import edit_add, edit_remove

    c = concept_from_string(concept_str)
    scene = sample_scene(seed)
    assert eval_concept(edit_add(scene, c, rng_seed=seed), c) is True
    assert eval_concept(edit_remove(scene, c), c) is False
