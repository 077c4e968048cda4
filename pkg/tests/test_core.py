"""Category, functor, and transformation law checking on explicit tables."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fincat.core import (
    FINSET,
    BoundaryError,
    FinCat,
    FunctorVal,
    MalformedTableError,
    comma_under_object,
    compose_functors,
    identity_functor,
    opposite,
    preorder_from_covers,
    validate_category,
    validate_functor,
    validate_nattrans,
)
from fincat.files import load_category, load_functor, load_nattrans

CATEGORY_SIZES = {
    "kite.fincat": (5, 14),
    "chain2.fincat": (2, 3),
    "chain3.fincat": (3, 6),
    "monoid_e.fincat": (1, 2),
    "a4.fincat": (4, 6),
    "b6.fincat": (6, 17),
    "disc2.fincat": (2, 2),
}


@pytest.mark.parametrize("name", sorted(CATEGORY_SIZES))
def test_bundled_categories_pass_all_laws(fix, name):
    cat = load_category(fix(name))
    objects, morphisms = CATEGORY_SIZES[name]
    assert len(cat.objects) == objects
    assert len(cat.morphisms) == morphisms
    report = validate_category(cat)
    assert report.passed, report.summary()
    assert [o.name for o in report.obligations] == [
        "coherence",
        "totality",
        "associativity",
        "left_identity",
        "right_identity",
    ]


BROKEN_CATEGORIES = {
    "bad_coherence.fincat": "coherence",
    "bad_assoc.fincat": "associativity",
    "bad_idl.fincat": "left_identity",
    "bad_idr.fincat": "right_identity",
}


@pytest.mark.parametrize("name", sorted(BROKEN_CATEGORIES))
def test_mutated_category_fails_targeted_law_with_witness(fix, name):
    report = validate_category(load_category(fix("broken", name)))
    assert not report.passed
    failing = report.obligation(BROKEN_CATEGORIES[name])
    assert not failing.passed
    assert failing.witness


def test_associativity_witness_is_replayable(fix):
    cat = load_category(fix("broken", "bad_assoc.fincat"))
    witness = validate_category(cat).obligation("associativity").witness
    h, g, f, left, right = witness
    assert cat.comp(h, cat.comp(g, f)) == left
    assert cat.comp(cat.comp(h, g), f) == right
    assert left != right


def test_bundled_functors_pass(fix):
    for name in (
        "f_kite.fun",
        "g_on_a.fun",
        "g_on_b.fun",
        "h_on_a.fun",
        "incl_a4_b6.fun",
        "incl_p_q.fun",
        "trunc_q_p.fun",
        "id_monoid.fun",
        "incl_disc2_p.fun",
    ):
        report = validate_functor(load_functor(fix(name)))
        assert report.passed, (name, report.summary())


@pytest.mark.parametrize(
    "name,law",
    [
        ("f_kite_bad_respids.fun", "respects_identities"),
        ("f_kite_bad_respcomp.fun", "respects_composition"),
    ],
)
def test_mutated_functor_fails_targeted_law(fix, name, law):
    report = validate_functor(load_functor(fix("broken", name)))
    assert not report.passed
    failing = report.obligation(law)
    assert not failing.passed and failing.witness


def test_identity_transformation_passes_and_mutant_fails(fix):
    assert validate_nattrans(load_nattrans(fix("id_fkite.nt"))).passed
    report = validate_nattrans(load_nattrans(fix("broken", "f_kite_bad_sqcond.nt")))
    assert not report.passed
    failing = report.obligation("square_condition")
    assert not failing.passed and failing.witness


# ---------------------------------------------------------------------------
# Structural constructions
# ---------------------------------------------------------------------------


@st.composite
def cover_relations(draw):
    size = draw(st.integers(min_value=1, max_value=5))
    objects = [f"o{i}" for i in range(size)]
    covers = []
    for lower in range(size):
        for upper in range(lower + 1, size):
            if draw(st.booleans()):
                covers.append((objects[lower], objects[upper]))
    return objects, covers


@given(cover_relations())
@settings(max_examples=60, deadline=None)
def test_preorder_closure_is_a_lawful_thin_category(data):
    objects, covers = data
    cat = preorder_from_covers(objects, covers)
    assert validate_category(cat).passed
    for x in cat.objects:
        for y in cat.objects:
            assert len(cat.hom(x, y)) <= 1


@given(cover_relations())
@settings(max_examples=40, deadline=None)
def test_opposite_is_an_involution(data):
    objects, covers = data
    cat = preorder_from_covers(objects, covers)
    assert opposite(opposite(cat)) == cat
    assert validate_category(opposite(cat)).passed


def test_opposite_swaps_hom_sets(kite):
    op = opposite(kite)
    for x in kite.objects:
        for y in kite.objects:
            assert sorted(kite.hom(x, y)) == sorted(op.hom(y, x))


def test_functor_composition_and_identity(fix):
    incl = load_functor(fix("incl_p_q.fun"))
    trunc = load_functor(fix("trunc_q_p.fun"))
    roundtrip = compose_functors(trunc, incl)
    ident = identity_functor(incl.source)
    assert roundtrip.object_map == ident.object_map
    assert roundtrip.morphism_map == ident.morphism_map
    assert validate_functor(roundtrip).passed


def test_composition_beyond_set_values_is_rejected(fix, f_kite):
    with pytest.raises(BoundaryError):
        compose_functors(f_kite, f_kite)


def test_comma_under_object_shapes(incl_a4_b6):
    cat, forget = comma_under_object("1", incl_a4_b6, orientation="under")
    assert len(cat.objects) == 4  # one triangle per object of the source
    assert validate_category(cat).passed
    assert validate_functor(forget).passed
    empty, _ = comma_under_object("6", incl_a4_b6, orientation="under")
    assert len(empty.objects) == 0

    over, _ = comma_under_object("6", incl_a4_b6, orientation="over")
    assert len(over.objects) == 4
    none_over, _ = comma_under_object("1", incl_a4_b6, orientation="over")
    assert len(none_over.objects) == 0


def test_comma_object_ids_carry_the_structure_morphism(incl_a4_b6):
    cat, forget = comma_under_object("1", incl_a4_b6, orientation="under")
    for oid in cat.objects:
        carried = forget.object_map[oid]
        assert oid.startswith(f"({carried},")


def test_malformed_tables_raise_before_law_checking():
    broken = FinCat(
        objects=("a",),
        morphisms={"f": ("a", "missing")},
        identity={"a": "f"},
        compose={},
    )
    with pytest.raises(MalformedTableError):
        validate_category(broken)


def test_functor_into_sets_requires_set_objects(kite):
    bad = FunctorVal(kite, FINSET, {x: x for x in kite.objects}, {})
    with pytest.raises(MalformedTableError):
        validate_functor(bad)
