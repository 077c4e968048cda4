"""Typed term language: parsing, inference, delta rules, reduction graphs."""

import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fincat.terms import (
    App,
    Lam,
    Pair,
    Proj,
    Signature,
    TermParseError,
    TermTypeError,
    TyArrow,
    TyAtom,
    TyProd,
    Var,
    canonical_print,
    curry_howard_translate,
    infer_inhabitants,
    one_step_reductions,
    parse_context,
    parse_signature,
    parse_term,
    parse_type,
    print_term,
    print_type,
    reduction_graph,
    typecheck,
)

from oracles import brute_inhabitants, goal_types


def _read(fix, name):
    with open(fix(name), encoding="utf-8") as handle:
        return handle.read()


# ---------------------------------------------------------------------------
# Parsing and printing
# ---------------------------------------------------------------------------


def test_type_parser_precedence():
    assert parse_type("A -> B -> C") == parse_type("A -> (B -> C)")
    assert parse_type("A * B -> C") == TyArrow(
        TyProd(TyAtom("A"), TyAtom("B")), TyAtom("C")
    )
    assert print_type(parse_type("(A -> B) * C")) == "(A -> B) * C"


def test_term_parser_shapes():
    t = parse_term("\\x:A. \\y:B. (x, p1 (y, x))")
    assert isinstance(t, Lam) and isinstance(t.body, Lam)
    assert print_term(parse_term("f a b")) == "f a b"  # application associates left


def test_parse_errors_carry_positions():
    with pytest.raises(TermParseError) as err:
        parse_type("A -> ")
    assert err.value.line == 1

    with pytest.raises(TermParseError):
        parse_term("\\x. x")  # missing annotation


atom_types = st.sampled_from([TyAtom("A"), TyAtom("B")])
types = st.recursive(
    atom_types,
    lambda inner: st.builds(TyArrow, inner, inner) | st.builds(TyProd, inner, inner),
    max_leaves=4,
)


@st.composite
def closed_terms(draw, depth=4):
    env: list[tuple[str, object]] = []

    def go(d):
        choices = ["lam"]
        if env:
            choices += ["var", "var"]
        if d > 1:
            choices += ["app", "pair", "proj"]
        kind = draw(st.sampled_from(choices))
        if kind == "var":
            name, _ = draw(st.sampled_from(env))
            return Var(name)
        if kind == "lam":
            name = f"x{len(env) + 1}"
            ty = draw(types)
            env.append((name, ty))
            body = go(d - 1) if d > 1 else Var(name)
            env.pop()
            return Lam(name, ty, body)
        if kind == "app":
            return App(go(d - 1), go(d - 1))
        if kind == "pair":
            return Pair(go(d - 1), go(d - 1))
        return Proj(draw(st.sampled_from([1, 2])), go(d - 1))

    return go(depth)


@given(closed_terms())
@settings(max_examples=120, deadline=None)
def test_print_parse_roundtrip(term):
    assert parse_term(print_term(term)) == term


def test_canonical_print_is_alpha_invariant():
    left = parse_term("\\u:A. \\v:A. u")
    right = parse_term("\\a:A. \\b:A. a")
    assert canonical_print(left) == canonical_print(right) == "\\x1:A. \\x2:A. x1"


# ---------------------------------------------------------------------------
# Type checking and the propositional reading
# ---------------------------------------------------------------------------


def test_typecheck_products_and_failures():
    ty = typecheck(parse_term("\\p:A*B. (p2 p, p1 p)"), ())
    assert print_type(ty) == "A * B -> B * A"
    with pytest.raises(TermTypeError):
        typecheck(parse_term("\\x:A. x x"), ())


def test_curry_howard_reading():
    assert curry_howard_translate(parse_type("A -> A")) == "P → P"
    ctx = parse_context("{f: A'->A}")
    text = curry_howard_translate(parse_type("A'*B -> A*B"), ctx)
    assert text == "P∧R → Q∧R from P→Q"


# ---------------------------------------------------------------------------
# Inference
# ---------------------------------------------------------------------------


def test_inference_reproduces_the_pairing_term():
    ctx = parse_context("{f: A'->A}")
    goal = parse_type("A'*B -> A*B")
    started = time.monotonic()
    terms = infer_inhabitants(ctx, goal, 6)
    assert time.monotonic() - started < 1.0
    prints = [canonical_print(t) for t in terms]
    assert "\\x1:A' * B. (f (p1 x1), p2 x1)" in prints


def test_identity_goal_has_exactly_one_inhabitant():
    terms = infer_inhabitants((), parse_type("A -> A"), 6)
    assert [canonical_print(t) for t in terms] == ["\\x1:A. x1"]


def test_uninhabited_goal_yields_nothing():
    assert infer_inhabitants((), parse_type("A -> B"), 5) == []


@given(st.sampled_from(goal_types(["A", "B"], 2)), st.integers(2, 4))
@settings(max_examples=60, deadline=None)
def test_inferred_terms_typecheck_and_are_normal(goal, depth):
    for term in infer_inhabitants((), goal, depth):
        assert typecheck(term, ()) == goal
        assert one_step_reductions(term) == []


def test_inference_matches_brute_force_oracle():
    for goal in goal_types(["A", "B"], 2):
        got = sorted(canonical_print(t) for t in infer_inhabitants((), goal, 4))
        assert got == brute_inhabitants((), goal, 4), print_type(goal)


def test_inference_with_hypotheses_matches_oracle():
    ctx = tuple(parse_context("{f: A->B, p: A*A}"))
    for goal in goal_types(["A", "B"], 1):
        got = sorted(canonical_print(t) for t in infer_inhabitants(ctx, goal, 4))
        assert got == brute_inhabitants(ctx, goal, 4), print_type(goal)


# ---------------------------------------------------------------------------
# Signatures, delta rules, reduction graphs
# ---------------------------------------------------------------------------


def test_signature_parsing_and_rule_typing(fix):
    sig = parse_signature(_read(fix, "arith.sig"))
    assert print_type(sig.constant_type("g")) == "N -> N"
    term = parse_term("g (2 + 3)", sig)
    assert print_type(typecheck(term, (), sig)) == "N"


def test_rule_pattern_variables_match_arbitrary_terms(fix):
    sig = parse_signature(_read(fix, "arith.sig"))
    succ = one_step_reductions(parse_term("g (2 + 3)", sig), sig)
    prints = sorted(canonical_print(t) for t in succ)
    # the rule fires on the unevaluated argument AND the argument can step
    assert prints == ["(2 + 3) * (2 + 3) + 4", "g 5"]


def test_reduction_graph_of_squaring_fixture(fix):
    sig = parse_signature(_read(fix, "arith.sig"))
    graph, report = reduction_graph(parse_term("g (2 + 3)", sig), sig)
    assert report.node_count == 8
    assert report.normal_forms == ("29",)
    assert report.terminating is True
    assert report.unique_nf is True
    assert report.locally_confluent_on_graph is True
    assert graph.root == "g (2 + 3)"


def test_partial_rules_leave_stuck_terms_normal(fix):
    sig = parse_signature(_read(fix, "sqrt.sig"))
    _, report_hit = reduction_graph(parse_term("sqrt 4", sig), sig)
    assert report_hit.normal_forms == ("2",)
    _, report_miss = reduction_graph(parse_term("sqrt 3", sig), sig)
    assert report_miss.normal_forms == ("sqrt 3",)


def test_graph_truncation_is_flagged_not_silent(fix):
    sig = parse_signature(_read(fix, "arith.sig"))
    graph, report = reduction_graph(parse_term("g (2 + 3)", sig), sig, node_cap=3)
    assert report.truncated
    assert graph.truncated
    assert report.terminating is None
    assert report.unique_nf is None


def test_malformed_rule_is_rejected():
    with pytest.raises(Exception):
        parse_signature("g : N -> N\nrule g(a) = b\n")  # unbound right-hand side
