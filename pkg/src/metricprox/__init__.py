"""Monotone-operator and proximal-calculus toolkit under non-standard metrics.

Resolvents of metric-scaled compositions U M*BM and parallel compositions
L |> A = (L A^{-1} L*)^{-1}, generalized proximity operators of infimal
postcompositions with their Moreau decomposition, brute-force verification
oracles, and a splitting solver whose x-update is exactly the generalized
prox.  All public objects are immutable and all operations are pure.
"""

from .admm import IterationRecord, RunReport, admm_solve
from .catalog import (
    ConvexFunction,
    conjugate_prox_metric,
    indicator_affine,
    indicator_ball,
    indicator_box,
    l1,
    linear,
    prox_metric,
    quadratic,
    separable_exp,
    zero,
)
from .compose import (
    AUTO,
    CLOSED_RANGE,
    FULL_RANGE,
    GENERAL,
    CompositionProblem,
    InnerSolveReport,
    parallel_sum_resolvent,
    resolvent_composed,
    resolvent_composed_closed_range,
    resolvent_composed_full_range,
    resolvent_composed_full_range_pair,
    resolvent_dispatch,
    resolvent_parallel_composition,
    solve_inner_inclusion,
)
from .config import DEFAULTS, ToleranceConfig
from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    InnerSolverDiverged,
    MaxIterations,
    MetricProxError,
    NotAttained,
    NotFound,
    NotMonotone,
    NotPositiveDefinite,
    NotSymmetric,
    RankDeficient,
    SpecError,
    Unsupported,
)
from .fixtures import saturating_kernel_pair, unattained_exp_problem
from .linalg import (
    LinearMap,
    Metric,
    SvdFactors,
    format_matrix,
    numerical_rank,
    operator_norm,
    parse_matrix,
    project_kernel_metric,
    project_range_metric,
    pseudoinverse,
    read_matrix,
    spd_sqrt,
    svd_factors,
    write_matrix,
)
from .operators import (
    MonotoneOperator,
    WarpedDiagnostics,
    WarpedKernel,
    affine_operator,
    as_custom,
    direct_sum,
    inverse_operator,
    metric_resolvent,
    warped_diagnostics,
    warped_resolvent,
    zero_operator,
)
from .oracle import (
    IdentityEntry,
    IdentityReport,
    OracleConfig,
    brute_prox,
    brute_resolvent,
    check_identity_suite,
)
from .postcompose import (
    SATISFIED,
    UNKNOWN,
    VIOLATED,
    ProxResult,
    prox_conjugate_composite,
    prox_infcomp,
    prox_infcomp_pinv_route,
    prox_postcomposition,
    qualification_hint,
    verify_generalized_moreau,
)

__version__ = "0.1.0"
