"""Finite category engine: table categories, set-valued functors, a typed
term language, a staged diagram DSL, and Yoneda/adjunction/Kan machinery."""

from .core import (
    FINSET,
    BoundaryError,
    CheckReport,
    CycleError,
    FinCat,
    FinCatError,
    FinSetCat,
    FunctorVal,
    MalformedTableError,
    NatTransVal,
    Obligation,
    comma_object_over_functor,
    comma_under_object,
    compose_functors,
    compose_nattrans,
    functor_image_of_diagram,
    identity_functor,
    identity_nattrans,
    opposite,
    preorder_from_covers,
    validate_category,
    validate_functor,
    validate_nattrans,
)
from .finset import (
    CapExceededError,
    FinSetMap,
    FinSetObj,
    colimit_finset,
    compose_maps,
    encode_map,
    enumerate_maps,
    enumerate_nattrans_finset,
    identity_map,
    limit_finset,
)
from .files import (
    AdjParts,
    FixtureParseError,
    ModelSpec,
    load_adjunction_parts,
    load_category,
    load_functor,
    load_model_spec,
    load_nattrans,
)
from .terms import (
    ReductionGraph,
    Signature,
    TermError,
    canonical_print,
    curry_howard_translate,
    infer_inhabitants,
    parse_context,
    parse_signature,
    parse_term,
    parse_type,
    print_term,
    print_type,
    reduction_graph,
    typecheck,
)
from .diagram import (
    DiagramAst,
    DiagramError,
    DiagramParseError,
    Model,
    build_model,
    check_commutativity,
    elaborate_context,
    evaluate_quantified,
    expand_annotation,
    extract_stages,
    parse_diagram,
    print_diagram,
    render_grid,
)
from .yoneda import (
    HomContext,
    check_representation,
    check_yoneda_roundtrips,
    find_representation,
    hom_cov_functor,
    hom_maps_functor,
    is_universal_arrow,
    seed_from_transform,
    transform_from_seed,
    yoneda_embedding,
    yoneda_pointwise_bijection,
)
from .adjunction import (
    AdjunctionError,
    AdjunctionVal,
    adjunction_from_universal_arrows,
    assemble_adjunction,
    check_kan_adjointness,
    counit_inclusion_check,
    flats_and_sharps,
    left_kan,
    precompose_functor,
    right_kan,
    verify_adjunction,
)

__all__ = [name for name in dir() if not name.startswith("_")]
