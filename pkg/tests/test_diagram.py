"""Diagram DSL: parsing, staging, model evaluation, context elaboration."""

import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fincat.diagram import (
    DiagramError,
    DiagramParseError,
    Node,
    build_model,
    check_commutativity,
    elaborate_context,
    evaluate_quantified,
    expand_annotation,
    extract_stages,
    parse_diagram,
    print_diagram,
    render_grid,
    validate_diagram,
)
from fincat.files import load_model_spec
from fincat.finset import CapExceededError


def _load(fix, name):
    with open(fix(name), encoding="utf-8") as handle:
        return parse_diagram(handle.read())


def _golden(fix, name):
    with open(fix("golden", name), encoding="utf-8") as handle:
        return handle.read()


DIAGRAMS = ["universal_arrow.diag", "equalizer.diag", "y0.diag", "univ_macro.diag"]


# ---------------------------------------------------------------------------
# Parsing, printing, validation
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", DIAGRAMS)
def test_print_parse_roundtrip_on_fixtures(fix, name):
    ast = _load(fix, name)
    assert parse_diagram(print_diagram(ast)) == ast


def test_parse_error_reports_line():
    with pytest.raises(DiagramParseError) as err:
        parse_diagram("layer L in P\nnode x L\n")
    assert err.value.line == 2


def test_bare_exists_needs_a_stage_number():
    text = 'layer L in P\nnode x : L "x" @exists\n'
    with pytest.raises(DiagramParseError):
        parse_diagram(text)


def test_bare_forall_and_existsuniq_default_stages():
    text = (
        "layer L in P\n"
        'node x : L "x" @forall\n'
        'node y : L "y" @existsuniq\n'
    )
    ast = parse_diagram(text)
    assert ast.nodes()["x"].stage == 1
    assert ast.nodes()["y"].stage == 2


def test_stage_numbers_must_be_contiguous_with_one_quantifier_each():
    base = "layer L in P\n"
    with pytest.raises(DiagramError):
        validate_diagram(parse_diagram(base + 'node x : L "x" @forall(2)\n'))
    mixed = base + 'node x : L "x" @forall(1)\nnode y : L "y" @exists(1)\n'
    with pytest.raises(DiagramError):
        validate_diagram(parse_diagram(mixed))


def test_value_carrying_arrows_reject_stage_annotations():
    base = 'layer L in P\nnode x : L "x"\nnode y : L "y"\n'
    with pytest.raises(DiagramParseError):
        parse_diagram(base + 'arrow m : x |-> y "m" @exists(1)\n')
    with pytest.raises(DiagramParseError):
        parse_diagram(base + 'arrow b : x <-> y "b" @forall(1)\n')


def test_mapsto_targets_cannot_be_quantified():
    text = (
        "layer L in P\nlayer M in Q\n"
        'node x : L "x"\n'
        'node y : M "y" @exists(1)\n'
        'arrow m : x |-> y "m"\n'
    )
    with pytest.raises(DiagramError):
        validate_diagram(parse_diagram(text))


def test_noncommute_paths_must_share_endpoints():
    text = (
        "layer L in P\n"
        'node x : L "x"\nnode y : L "y"\nnode z : L "z"\n'
        'arrow f : x -> y "f"\narrow g : x -> z "g"\n'
        "noncommute f ; g\n"
    )
    with pytest.raises(DiagramError):
        validate_diagram(parse_diagram(text))


@st.composite
def small_diagrams(draw):
    lines = ["layer L in P", "layer M in Q"]
    node_count = draw(st.integers(min_value=1, max_value=4))
    names = [f"n{i}" for i in range(node_count)]
    layer_of = {}
    for name in names:
        layer = draw(st.sampled_from(["L", "M"]))
        layer_of[name] = layer
        lines.append(f'node {name} : {layer} "{name}"')
    arrows = 0
    stage_one = False
    for i in range(node_count):
        for j in range(i + 1, node_count):
            if layer_of[names[i]] == layer_of[names[j]] and draw(st.booleans()):
                suffix = ""
                if not stage_one and draw(st.booleans()):
                    suffix = " @forall(1)"
                    stage_one = True
                lines.append(f'arrow a{arrows} : {names[i]} -> {names[j]} "a{arrows}"{suffix}')
                arrows += 1
    return "\n".join(lines) + "\n"


@given(small_diagrams())
@settings(max_examples=60, deadline=None)
def test_print_parse_roundtrip_on_generated_diagrams(text):
    ast = parse_diagram(text)
    validate_diagram(ast)
    assert parse_diagram(print_diagram(ast)) == ast


# ---------------------------------------------------------------------------
# Stage extraction
# ---------------------------------------------------------------------------


def test_equalizer_stage_shape(fix):
    stages = extract_stages(_load(fix, "equalizer.diag"))
    assert [s.quantifier for s in stages] == [
        None,
        "forall",
        "exists",
        "forall",
        "existsuniq",
    ]
    assert [s.counts() for s in stages] == [(0, 0), (2, 2), (3, 3), (4, 4), (4, 5)]
    assert stages[1].new_elements == ("X", "Y", "f", "g")


def test_universal_arrow_stage_shape(fix):
    stages = extract_stages(_load(fix, "universal_arrow.diag"))
    assert [s.quantifier for s in stages] == [None, "forall", "existsuniq"]
    assert [s.counts() for s in stages] == [(3, 2), (5, 4), (5, 7)]


def test_each_stage_is_itself_a_valid_diagram(fix):
    for name in DIAGRAMS:
        for stage in extract_stages(_load(fix, name)):
            validate_diagram(stage.diagram)  # must not raise


def test_erasure_cannot_orphan_an_earlier_stage_element(fix):
    text = (
        "layer L in P\n"
        'node x : L "x"\n'
        'node y : L "y" @exists(2)\n'
        'arrow f : x -> y "f" @forall(1)\n'
    )
    with pytest.raises(DiagramError):
        extract_stages(parse_diagram(text))


def test_dropped_noncommute_references(fix):
    # erasing stage-1 arrows drops the noncommute declaration with them
    ast = _load(fix, "equalizer.diag")
    stages = extract_stages(ast)
    assert not stages[0].diagram.noncommutes()
    assert ast.noncommutes()


# ---------------------------------------------------------------------------
# Models, commutativity, evaluation
# ---------------------------------------------------------------------------


def test_build_model_rejects_bad_binds(fix, tmp_path):
    ast = _load(fix, "universal_arrow.diag")
    good = load_model_spec(fix("models", "universal_arrow_galois.model"))
    build_model(ast, good)  # sanity

    bad = tmp_path / "bad.model"
    bad.write_text(
        f"layer LA = {fix('chain2.fincat')}\n"
        f"layer LB = {fix('chain3.fincat')}\n"
        f"functor LB LA = {fix('trunc_q_p.fun')}\n"
        "bind A = 0\nbind B = 0\nbind eta = id_0\n"
        "bind f = id_0\n"  # f is quantified at stage 2
    )
    with pytest.raises(DiagramError):
        build_model(ast, load_model_spec(str(bad)))


def test_stage_zero_must_be_fully_bound(fix, tmp_path):
    ast = _load(fix, "universal_arrow.diag")
    partial = tmp_path / "partial.model"
    partial.write_text(
        f"layer LA = {fix('chain2.fincat')}\n"
        f"layer LB = {fix('chain3.fincat')}\n"
        f"functor LB LA = {fix('trunc_q_p.fun')}\n"
        "bind A = 0\nbind B = 0\n"  # eta missing
    )
    with pytest.raises(DiagramError):
        build_model(ast, load_model_spec(str(partial)))


def test_commutativity_report_structure(fix):
    ast = _load(fix, "equalizer.diag")
    spec = load_model_spec(fix("models", "equalizer_chain2.model"))
    model = build_model(ast, spec)
    stage1 = extract_stages(ast)[1].diagram
    assignment = {"X": "0", "Y": "1", "f": "0->1", "g": "0->1"}
    report = check_commutativity(stage1, model, assignment)
    assert report.passed, report.summary()
    names = [o.name for o in report.obligations]
    assert names[0] == "endpoint_typing"
    assert "commutes[L]" in names
    assert "bij_round_trips" in names
    assert "mapsto_equations" in names

    with pytest.raises(DiagramError):
        check_commutativity(stage1, model, {"X": "0"})  # unassigned elements


def test_evaluation_galois_universal_arrow_holds(fix):
    ast = _load(fix, "universal_arrow.diag")
    spec = load_model_spec(fix("models", "universal_arrow_galois.model"))
    value, trace = evaluate_quantified(ast, build_model(ast, spec))
    assert value is True
    assert "stage 1" in trace.render()


def test_evaluation_equalizer_poset_vs_monoid(fix):
    ast = _load(fix, "equalizer.diag")
    chain = load_model_spec(fix("models", "equalizer_chain2.model"))
    value, _ = evaluate_quantified(ast, build_model(ast, chain))
    assert value is True

    monoid = load_model_spec(fix("models", "equalizer_monoid.model"))
    value, trace = evaluate_quantified(ast, build_model(ast, monoid))
    assert value is False
    counterexample = dict(trace.child.assignment)
    assert counterexample == {"X": "*", "Y": "*", "f": "e", "g": "id_*"}


def test_evaluation_cap_is_an_error_not_truncation(fix):
    ast = _load(fix, "equalizer.diag")
    monoid = load_model_spec(fix("models", "equalizer_monoid.model"))
    with pytest.raises(CapExceededError):
        evaluate_quantified(ast, build_model(ast, monoid), cap=1)


# ---------------------------------------------------------------------------
# Elaboration, rendering, macros
# ---------------------------------------------------------------------------


def test_golden_context_universal_arrow(fix):
    assert elaborate_context(_load(fix, "universal_arrow.diag")) == _golden(
        fix, "universal_arrow.context.txt"
    )


def test_golden_context_y0(fix):
    assert elaborate_context(_load(fix, "y0.diag")) == _golden(fix, "y0.context.txt")


def test_golden_grid_y0(fix):
    assert render_grid(_load(fix, "y0.diag")) == _golden(fix, "y0.grid.txt")


def test_grid_roundtrips_do_not_change_the_ast(fix):
    ast = _load(fix, "y0.diag")
    render_grid(ast)
    assert parse_diagram(print_diagram(ast)) == ast


def test_macro_expansion_matches_hand_written_diagram(fix):
    expanded = expand_annotation(_load(fix, "univ_macro.diag"), "univ")
    hand = _load(fix, "universal_arrow.diag")
    assert elaborate_context(expanded) == elaborate_context(hand)


def test_macro_expansion_freshens_identifiers(fix):
    expanded = expand_annotation(_load(fix, "univ_macro.diag"), "univ")
    assert any(name.endswith("$1") for name in expanded.nodes())


def test_macro_expansion_is_stable_under_no_users(fix):
    ast = _load(fix, "universal_arrow.diag")
    macro_text = print_diagram(ast) + "macro unused := {\n  node q : LB \"q\"\n}\n"
    with_macro = parse_diagram(macro_text)
    assert expand_annotation(with_macro, "unused") == with_macro


def test_macro_expansion_rejects_unknown_macro(fix):
    with pytest.raises(DiagramError):
        expand_annotation(_load(fix, "universal_arrow.diag"), "missing")


def test_macro_name_capture_is_detected():
    # The surface grammar cannot spell "$" inside an identifier, so the
    # colliding name is planted directly on the syntax tree.
    text = (
        "layer L in P\n"
        'node x : L "x"\n'
        "macro m := {\n"
        '  node w : L "inner"\n'
        "}\n"
        'node y : L "y" @use(m)\n'
    )
    ast = parse_diagram(text)
    planted = dataclasses.replace(
        ast, decls=ast.decls + (Node(id="w$1", layer="L", label="planted"),)
    )
    with pytest.raises(DiagramError) as err:
        expand_annotation(planted, "m")
    assert "capture" in str(err.value)
