"""Realignment separability criteria and the linear witnesses equivalent to them."""
from .basis import OperatorBasis, build_basis, expand, reconstruct
from .criteria import (
    CorrelationData,
    CriterionReport,
    ccnr,
    correlation_data,
    default_grid,
    enhanced_ccnr,
    family_criterion,
    quadratic_F,
    scan_family,
)
from .linalg import partial_trace, realign, singular_values, trace_norm, vectorize
from .states import DensityMatrix, load_state, save_state
from .witnesses import (
    WitnessSpec,
    certify_equivalence,
    finite_r_isometry,
    optimal_witness,
    witness_finite,
    witness_w3,
    witness_w_infinity,
)

__version__ = "0.1.0"
