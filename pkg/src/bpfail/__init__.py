"""Certificates for basis pursuit failure on sign-consistent structured matrices."""

from .certify import (
    FailureCertificate,
    GSequences,
    PVector,
    UniquenessCertificate,
    certify_drastic_failure,
    certify_unimodality,
    column_coherence,
    critical_index,
    dual_certificate_check,
    failure_indices,
    g_sequences,
    p_vector,
    sign_transform,
    uniqueness_check,
)
from .estimators import BasisPursuit, FailureCertifier, L0Regressor
from .exceptions import (
    BpfailError,
    CompoundTooLargeError,
    ImageConditionError,
    NumericFailure,
    SingularBlockError,
)
from .generators import (
    FuelInstance,
    FunctionFamily,
    LtiSystem,
    bernstein_sample,
    check_family_conditions,
    companion_system,
    confluent_matrix,
    ctrb,
    fuel_instance,
    hankel,
    obsv,
    page_matrix,
)
from .linalg import (
    compound,
    consecutive_minors,
    forward_difference,
    leading_block_coeffs,
    minor,
    rank_estimate,
    variation,
)
from .solvers import RevisedSimplex, SparseSolution, lp_feasibility, solve_bp, solve_l0
from .structure import (
    StructureReport,
    is_log_concave,
    is_unimodal,
    pena_transform,
    verify_pena_strict,
    verify_sign_consistent,
    verify_totally_positive,
    verify_variation_bounding,
)

__version__ = "0.1.0"
