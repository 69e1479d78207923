"""Exact solving and structural analysis for directed Steiner network
instances whose demand patterns come from restricted classes."""

from .graphs import (
    CondensationGraph,
    Layout,
    Pattern,
    SizeGuardError,
    SolutionNetwork,
    WeightedDigraph,
    feasible,
    minimalize,
    reachable,
    scc_condensation,
    transitive_closure,
    transitively_equivalent,
)
from .classify import (
    CaterpillarCertificate,
    Obstruction,
    StarDecomposition,
    decompose_or_obstruct,
    diamond_pattern,
    directed_cycle_pattern,
    hamiltonian_path_semicomplete,
    identify_terminals,
    is_almost_caterpillar,
    is_almost_caterpillar_equivalent,
    is_caterpillar,
    max_matching,
    star_decomposition,
    validate_certificate,
    validate_obstruction,
    vertex_cover_number,
)
from .solver import (
    DpEntryKey,
    brute_force_solve,
    check_entry,
    fixed_path_family,
    ilp_solve,
    solve_dp,
    u_projection,
)
from .reductions import (
    MccInstance,
    ReductionOutput,
    closure_lift,
    cycle_pattern_instance,
    expander_like_instance,
    has_clique,
    mcc_to_flawed_diamond,
    mcc_to_pure_diamond,
)
from .cli import (
    DocumentError,
    parse_instance,
    parse_solution,
    run,
    serialize_instance,
)
from .structure import (
    CoreDecomposition,
    CutwidthResult,
    TreeDecomposition,
    composed_layout,
    core_decomposition,
    cutwidth_exact,
    cutwidth_of_layout,
    necessary_edges,
    scc_arborescences,
    scc_pattern,
    smooth_decomposition,
    treewidth_exact,
    validate_core_decomposition,
    validate_decomposition,
    verify_cutwidth_bound,
)

__version__ = "0.1.0"

__all__ = [
    "CaterpillarCertificate",
    "CondensationGraph",
    "CoreDecomposition",
    "CutwidthResult",
    "DocumentError",
    "DpEntryKey",
    "Layout",
    "MccInstance",
    "Obstruction",
    "Pattern",
    "ReductionOutput",
    "SizeGuardError",
    "SolutionNetwork",
    "StarDecomposition",
    "TreeDecomposition",
    "WeightedDigraph",
    "brute_force_solve",
    "check_entry",
    "closure_lift",
    "composed_layout",
    "core_decomposition",
    "cutwidth_exact",
    "cutwidth_of_layout",
    "cycle_pattern_instance",
    "decompose_or_obstruct",
    "diamond_pattern",
    "directed_cycle_pattern",
    "expander_like_instance",
    "feasible",
    "fixed_path_family",
    "hamiltonian_path_semicomplete",
    "has_clique",
    "identify_terminals",
    "ilp_solve",
    "is_almost_caterpillar",
    "is_almost_caterpillar_equivalent",
    "is_caterpillar",
    "max_matching",
    "mcc_to_flawed_diamond",
    "mcc_to_pure_diamond",
    "minimalize",
    "necessary_edges",
    "parse_instance",
    "parse_solution",
    "reachable",
    "run",
    "scc_arborescences",
    "scc_condensation",
    "scc_pattern",
    "serialize_instance",
    "smooth_decomposition",
    "solve_dp",
    "star_decomposition",
    "transitive_closure",
    "transitively_equivalent",
    "treewidth_exact",
    "u_projection",
    "validate_certificate",
    "validate_core_decomposition",
    "validate_decomposition",
    "validate_obstruction",
    "verify_cutwidth_bound",
    "vertex_cover_number",
    "__version__",
]
