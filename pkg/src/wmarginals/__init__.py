"""Reduced density matrices of qubit states and reconstruction of W-class
states from their two-party marginals."""

from .bitindex import (
    all_pairs,
    coverage_graph_connected,
    enumerate_suffixes,
    from_bits,
    least_suffix,
    single_one_index,
    star_pairs,
    to_bits,
)
from .errors import CapExceededError, InvalidStateError
from .oracle import (
    build_marginal_map,
    multistart_pure_fit,
    null_space,
    phase_twist,
    twist_coefficients,
    uniqueness_evidence,
)
from .ptrace import diagonal_expressions, marginal_residual, partial_trace, rdm_from_density, rdm_from_pure
from .reconstruct import (
    MarginalSet,
    ReconstructionReport,
    Verdict,
    check_w_form,
    fix_gauge,
    gram_rank1_factor,
    reconstruct_mixed,
    reconstruct_pure,
)
from .states import (
    DensityMatrix,
    PureState,
    Rdm,
    Tolerances,
    WCoefficients,
    ghz_state,
    make_w,
    psi_plus_decomposition,
    random_w,
    uniform_w,
    w_bipartite_marginal,
    w_density,
)

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "DensityMatrix",
    "InvalidStateError",
    "MarginalSet",
    "PureState",
    "Rdm",
    "ReconstructionReport",
    "Tolerances",
    "Verdict",
    "WCoefficients",
    "all_pairs",
    "build_marginal_map",
    "check_w_form",
    "coverage_graph_connected",
    "diagonal_expressions",
    "enumerate_suffixes",
    "fix_gauge",
    "from_bits",
    "ghz_state",
    "gram_rank1_factor",
    "least_suffix",
    "make_w",
    "marginal_residual",
    "multistart_pure_fit",
    "null_space",
    "partial_trace",
    "phase_twist",
    "psi_plus_decomposition",
    "random_w",
    "rdm_from_density",
    "rdm_from_pure",
    "reconstruct_mixed",
    "reconstruct_pure",
    "single_one_index",
    "star_pairs",
    "to_bits",
    "twist_coefficients",
    "uniform_w",
    "uniqueness_evidence",
    "w_bipartite_marginal",
    "w_density",
]
