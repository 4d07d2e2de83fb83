"""Mutually unbiased bases, the magic simplex of Bell-diagonal qudit states,
and bound-entanglement detection with the MUB correlation witness."""

from .criteria import (
    SimplexEvaluator,
    classify,
    joint_distribution,
    mub_witness,
    mutual_predictability,
    optimal_labeling,
    ppt_check,
    separable_bound,
)
from .explore import (
    incomplete_mub_scan,
    multi_compare,
    optimize_extreme,
    scan_slice,
)
from .mubs import (
    Basis,
    MubSet,
    build_complete_mub,
    build_partial_mub_6,
    conjugate_basis,
    verify_mub,
)
from .states import (
    FamilyParams,
    SimplexCoefficients,
    bell_projector,
    bell_state,
    family_coefficients,
    family_rho,
    multipartite_family,
    multipartite_vertex,
    simplex_state,
    weyl,
)

__version__ = "0.1.0"
