"""Exact-arithmetic classification of maximal exceptional collections
of line bundles on the smooth toric Fano threefolds and fourfolds of
Picard rank two, with replayable fullness certificates."""

from .classify import (
    Collection,
    CollectionTemplate,
    MatchReport,
    TableComparison,
    cell_truth,
    compare_table,
    deviating_types,
    difference_is_admissible,
    difference_signature,
    enumerate_maximal,
    group_by_difference_signature,
    instantiate_template,
    is_exceptional_collection,
    load_tables,
    load_templates,
    match_collection,
    match_templates,
    pair_table,
    pair_table_truth,
    parse_cell_condition,
    template_instances,
)
from .cohomology import (
    CZClassification,
    InternalConsistencyError,
    LineFamily,
    cohomology,
    cz_classification,
    euler_char,
    euler_char_closed,
    euler_char_hrr,
    is_cohomologically_zero,
    line_families,
    load_cz_fixtures,
    projective_space_cohomology,
    pushforward_weights,
    serre_dual,
    sweep,
)
from .mutation import (
    CertificateCheck,
    FullnessCertificate,
    Move,
    NotFound,
    SearchBudget,
    apply_move,
    check_certificate,
    is_orlov_seed,
    load_chains,
    orlov_seeds,
    parse_certificate,
    reachable_component,
    same_component,
    verify_fullness,
)
from .variety import (
    Divisor,
    Realization,
    VarietyDescriptor,
    data_dir,
    divisor_power_pairing,
    dump_registry,
    intersection_number,
    intersection_pairing,
    registry,
    variety,
)

__version__ = "0.1.0"

__all__ = [
    "Collection",
    "CollectionTemplate",
    "CertificateCheck",
    "CZClassification",
    "Divisor",
    "FullnessCertificate",
    "InternalConsistencyError",
    "LineFamily",
    "MatchReport",
    "Move",
    "NotFound",
    "Realization",
    "SearchBudget",
    "TableComparison",
    "VarietyDescriptor",
    "apply_move",
    "cell_truth",
    "check_certificate",
    "cohomology",
    "compare_table",
    "cz_classification",
    "data_dir",
    "deviating_types",
    "difference_is_admissible",
    "difference_signature",
    "divisor_power_pairing",
    "dump_registry",
    "enumerate_maximal",
    "euler_char",
    "euler_char_closed",
    "euler_char_hrr",
    "group_by_difference_signature",
    "instantiate_template",
    "intersection_number",
    "intersection_pairing",
    "is_cohomologically_zero",
    "is_exceptional_collection",
    "is_orlov_seed",
    "line_families",
    "load_chains",
    "load_cz_fixtures",
    "load_tables",
    "load_templates",
    "match_collection",
    "match_templates",
    "orlov_seeds",
    "pair_table",
    "pair_table_truth",
    "parse_cell_condition",
    "parse_certificate",
    "projective_space_cohomology",
    "pushforward_weights",
    "reachable_component",
    "registry",
    "same_component",
    "serre_dual",
    "sweep",
    "template_instances",
    "variety",
    "verify_fullness",
    "__version__",
]
