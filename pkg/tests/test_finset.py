"""Finite sets and maps: encodings, enumeration, limits, colimits."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fincat.core import FINSET, FunctorVal, validate_functor
from fincat.finset import (
    CapExceededError,
    EncodingError,
    FinSetMap,
    FinSetObj,
    class_atom,
    colimit_finset,
    compose_maps,
    decode_map,
    encode_map,
    enumerate_maps,
    enumerate_nattrans_finset,
    identity_map,
    limit_finset,
    nattrans_key,
    tuple_atom,
)
from fincat.yoneda import hom_cov_functor

from oracles import nattrans_table_key, product_filter_nattrans

atoms = st.lists(
    st.text(alphabet="abcxyz0123456789", min_size=1, max_size=3),
    min_size=0,
    max_size=5,
    unique=True,
)


@given(atoms, atoms, st.randoms())
@settings(max_examples=80, deadline=None)
def test_encode_decode_roundtrip(dom_atoms, cod_atoms, rng):
    dom = FinSetObj(dom_atoms)
    cod = FinSetObj(cod_atoms)
    if len(dom) and not len(cod):
        return
    table = {a: rng.choice(list(cod)) for a in dom}
    mapping = FinSetMap(dom, cod, table)
    assert decode_map(encode_map(mapping), dom, cod) == mapping


def test_encode_rejects_reserved_atoms_strictly():
    s = FinSetObj(("a->b",))
    m = identity_map(s)
    with pytest.raises(EncodingError):
        encode_map(m)
    assert encode_map(m, strict=False) == "{a->b->a->b}"


def test_map_totality_and_extensional_equality():
    dom, cod = FinSetObj("ab"), FinSetObj("xy")
    with pytest.raises(ValueError):
        FinSetMap(dom, cod, {"a": "x"})
    m1 = FinSetMap(dom, cod, {"a": "x", "b": "y"})
    m2 = FinSetMap(dom, cod, {"b": "y", "a": "x"})
    assert m1 == m2


def test_enumerate_maps_count_order_and_cap():
    dom, cod = FinSetObj("ab"), FinSetObj("xyz")
    maps = enumerate_maps(dom, cod)
    assert len(maps) == 9  # |cod| ** |dom|
    encodings = [encode_map(m) for m in maps]
    assert encodings == sorted(encodings)
    assert encodings[0] == "{a->x,b->x}"
    with pytest.raises(CapExceededError):
        enumerate_maps(dom, cod, 8)
    assert len(enumerate_maps(FinSetObj(()), cod)) == 1  # the empty map


def test_composition_is_associative_on_samples():
    a, b, c, d = (FinSetObj(x) for x in ("pq", "rs", "tu", "vw"))
    f = FinSetMap(a, b, {"p": "r", "q": "s"})
    g = FinSetMap(b, c, {"r": "u", "s": "t"})
    h = FinSetMap(c, d, {"t": "v", "u": "w"})
    assert compose_maps(h, compose_maps(g, f)) == compose_maps(compose_maps(h, g), f)


# ---------------------------------------------------------------------------
# Limits and colimits, checked against raw product/quotient constructions
# ---------------------------------------------------------------------------


def _empty_category():
    from fincat.core import FinCat

    return FinCat(objects=(), morphisms={}, identity={}, compose={})


def test_limit_of_empty_diagram_is_a_point():
    empty = FunctorVal(_empty_category(), FINSET, {}, {})
    carrier, projections = limit_finset(empty)
    assert list(carrier) == ["()"]
    assert projections == {}


def test_limit_matches_brute_force_families(f_kite):
    carrier, projections = limit_finset(f_kite)
    cat = f_kite.source
    objs = sorted(cat.objects)
    families = []
    for combo in itertools.product(*(list(f_kite.object_map[x]) for x in objs)):
        family = dict(zip(objs, combo))
        if all(
            f_kite.morphism_map[m].table[family[x]] == family[y]
            for m, (x, y) in cat.morphisms.items()
        ):
            families.append(family)
    assert len(carrier) == len(families)
    assert sorted(carrier) == sorted(tuple_atom(fam) for fam in families)
    for fam in families:
        atom = tuple_atom(fam)
        for x in objs:
            assert projections[x].table[atom] == fam[x]


def test_colimit_matches_union_find_quotient(h_on_a):
    carrier, injections = colimit_finset(h_on_a)
    cat = h_on_a.source
    tagged = [(x, a) for x in sorted(cat.objects) for a in h_on_a.object_map[x]]
    parent = {t: t for t in tagged}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    def union(s, t):
        rs, rt = find(s), find(t)
        if rs != rt:
            parent[max(rs, rt)] = min(rs, rt)

    for m, (x, y) in cat.morphisms.items():
        for a in h_on_a.object_map[x]:
            union((x, a), (y, h_on_a.morphism_map[m].table[a]))
    classes = {find(t) for t in tagged}
    assert len(carrier) == len(classes)
    for x, a in tagged:
        rep_x, rep_a = find((x, a))
        assert injections[x].table[a] == class_atom(rep_x, rep_a)


def test_colimit_of_disjoint_values_is_a_sum():
    from fincat.core import FinCat

    disc = FinCat(
        objects=("l", "r"),
        morphisms={"id_l": ("l", "l"), "id_r": ("r", "r")},
        identity={"l": "id_l", "r": "id_r"},
        compose={("id_l", "id_l"): "id_l", ("id_r", "id_r"): "id_r"},
    )
    d = FunctorVal(
        disc,
        FINSET,
        {"l": FinSetObj("ab"), "r": FinSetObj("cd")},
        {"id_l": identity_map(FinSetObj("ab")), "id_r": identity_map(FinSetObj("cd"))},
    )
    carrier, _ = colimit_finset(d)
    assert len(carrier) == 4
    product, _ = limit_finset(d)
    assert len(product) == 4  # binary product of two 2-element sets


# ---------------------------------------------------------------------------
# Natural transformation enumeration against the product-filter oracle
# ---------------------------------------------------------------------------


def test_enumeration_matches_oracle_on_kite(kite, f_kite):
    for anchor in sorted(kite.objects):
        hom = hom_cov_functor(kite, anchor)
        lib = [nattrans_table_key(t) for t in enumerate_nattrans_finset(hom, f_kite)]
        assert lib == sorted(lib)
        assert lib == product_filter_nattrans(hom, f_kite)


def test_enumeration_matches_oracle_on_endotransformations(f_kite):
    lib = sorted(
        nattrans_table_key(t) for t in enumerate_nattrans_finset(f_kite, f_kite)
    )
    oracle = product_filter_nattrans(f_kite, f_kite)
    assert lib == oracle
    assert len(oracle) == 8


def test_enumeration_respects_cap(f_kite):
    with pytest.raises(CapExceededError):
        enumerate_nattrans_finset(f_kite, f_kite, cap=3)


def test_nattrans_key_orders_components_deterministically(f_kite):
    first = enumerate_nattrans_finset(f_kite, f_kite)[0]
    key = nattrans_key(first)
    assert [entry[0] for entry in key] == sorted(f_kite.source.objects)


def test_atom_constructors_are_stable():
    assert tuple_atom({"j2": "y", "j1": "x"}) == "(j1=x, j2=y)"
    assert class_atom("j", "x") == "[j:x]"
