"""Resolvents of metric-scaled compositions U M*BM and parallel compositions.

Three routes are implemented for J_{U M*BM}: the direct dual route (solve
Mx in M U M* v + B^{-1} v, then p = x - U M* v), a pseudoinverse route that
lifts x through (sqrt(U) M*)^+ before the same inner solve, and a full-range
route that trades the inner solve for two metric resolvents.  The parallel
composition L|>A = (L A^{-1} L*)^{-1} gets the mirrored trio, plus the
parallel-sum special case built on a product space.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULTS, ToleranceConfig
from .errors import DimensionMismatch, InnerSolverDiverged, NotFound, RankDeficient
from .linalg import (
    LinearMap,
    Metric,
    as_vector,
    numerical_rank,
    operator_norm,
    project_kernel_metric,
    spd_sqrt,
    svd_factors,
)
from .operators import MonotoneOperator, direct_sum, inverse_operator, metric_resolvent
from . import solvers

Array = np.ndarray
log = logging.getLogger(__name__)

GENERAL = "general"
CLOSED_RANGE = "closed_range"
FULL_RANGE = "full_range"
AUTO = "auto"
ROUTES = (GENERAL, CLOSED_RANGE, FULL_RANGE, AUTO)


@dataclass(frozen=True)
class CompositionProblem:
    """Data for J_{U M*BM}: B on the inner space, M mapping the outer space
    into it, U an SPD metric on the outer space.

    Maximal monotonicity of M*BM cannot be certified for black-box operators;
    ``monotone_assertion`` records the caller's claim.
    """

    B: MonotoneOperator
    M: LinearMap
    U: Metric
    route: str = AUTO
    monotone_assertion: bool = True

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}")
        if self.M.cols != self.U.dim:
            raise DimensionMismatch(
                f"map domain {self.M.cols} != metric dimension {self.U.dim}"
            )
        if self.B.dim != self.M.rows:
            raise DimensionMismatch(
                f"operator dimension {self.B.dim} != map codomain {self.M.rows}"
            )


@dataclass(frozen=True)
class InnerSolveReport:
    """Outcome of the dual inclusion solve.

    The dual point can be non-unique; M* dual_point is always unique, which
    is what the outer formulas consume.
    """

    iterations: int
    final_residual: float
    dual_point: Optional[Array]
    status: str  # converged | diverged | not_found


_STATUS_MAP = {
    solvers.CONVERGED: "converged",
    solvers.BLOWUP: "not_found",
    solvers.STALLED: "diverged",
    solvers.MAX_ITER: "diverged",
}


def solve_inner_inclusion(
    B: MonotoneOperator,
    M: LinearMap,
    U: Metric,
    rhs,
    cfg: ToleranceConfig = DEFAULTS,
    v0=None,
) -> InnerSolveReport:
    """Find v with rhs in M U M* v + B^{-1} v by forward-backward iteration.

    Step size 0.9/||M U M*|| (1 when M = 0); the deterministic start v0 = 0
    keeps reports reproducible and is immaterial for M* v.
    """
    rhs_v = as_vector(rhs, M.rows, "rhs")
    kmat = M.mat @ U.U.mat @ M.mat.T
    kmat = 0.5 * (kmat + kmat.T)
    lip = operator_norm(LinearMap(kmat), cfg) if np.any(kmat) else 0.0
    gamma = 0.9 / lip if lip > 0 else 1.0
    b_inv = inverse_operator(B)

    def forward(v):
        return kmat @ v - rhs_v

    start = np.zeros(M.rows) if v0 is None else as_vector(v0, M.rows, "v0")
    v, stats = solvers.forward_backward(b_inv.resolve, forward, start, gamma, cfg)
    status = _STATUS_MAP[stats.status]
    return InnerSolveReport(
        iterations=stats.iterations,
        final_residual=stats.residual,
        dual_point=v if status == "converged" else None,
        status=status,
    )


def _require_converged(report: InnerSolveReport, what: str) -> Array:
    if report.status == "converged":
        return report.dual_point
    if report.status == "not_found":
        raise NotFound(f"{what}: inner iterates diverged after {report.iterations} steps")
    raise InnerSolverDiverged(
        f"{what}: inner solve stopped at residual {report.final_residual:.3e} "
        f"after {report.iterations} iterations",
        iterations=report.iterations,
        residual=report.final_residual,
    )


def resolvent_composed_report(problem: CompositionProblem, x, cfg: ToleranceConfig = DEFAULTS):
    """Direct dual route; returns (value, inner report)."""
    v = as_vector(x, problem.U.dim)
    report = solve_inner_inclusion(problem.B, problem.M, problem.U, problem.M.apply(v), cfg)
    dual = _require_converged(report, "composed resolvent")
    p = v - problem.U.apply(problem.M.adjoint.apply(dual))
    return p, report


def resolvent_composed(problem: CompositionProblem, x, cfg: ToleranceConfig = DEFAULTS) -> Array:
    return resolvent_composed_report(problem, x, cfg)[0]


def resolvent_composed_closed_range_report(
    problem: CompositionProblem, x, cfg: ToleranceConfig = DEFAULTS
):
    """Pseudoinverse route: lift x through (sqrt(U) M*)^+ then solve the same
    inner inclusion with rhs = M U M* y.  Returns (value, inner report)."""
    v = as_vector(x, problem.U.dim)
    M, U = problem.M, problem.U
    s = U.U_sqrt.mat @ M.mat.T
    y = svd_factors(s).pinv_matrix() @ U.apply_inv_sqrt(v)
    kmat = M.mat @ U.U.mat @ M.mat.T
    report = solve_inner_inclusion(problem.B, M, U, kmat @ y, cfg)
    dual = _require_converged(report, "composed resolvent (pseudoinverse route)")
    return v - U.apply(M.adjoint.apply(dual)), report


def resolvent_composed_closed_range(
    problem: CompositionProblem, x, cfg: ToleranceConfig = DEFAULTS
) -> Array:
    return resolvent_composed_closed_range_report(problem, x, cfg)[0]


def resolvent_composed_full_range_pair(
    problem: CompositionProblem, x, cfg: ToleranceConfig = DEFAULTS
):
    """Both full-range formulas; they must agree when rank(M) = rows(M).

    Returns (primary value, alternative value); the alternative combines the
    kernel projection with a resolvent in the M U M* metric.
    """
    v = as_vector(x, problem.U.dim)
    M, U, B = problem.M, problem.U, problem.B
    if numerical_rank(M, cfg) < M.rows:
        raise RankDeficient(
            f"full-range route needs rank {M.rows}, map has rank {numerical_rank(M, cfg)}"
        )
    kmat = M.mat @ U.U.mat @ M.mat.T
    k_metric = spd_sqrt(kmat, cfg)
    w_metric = k_metric.inverse()

    mx = M.apply(v)
    dual = metric_resolvent(inverse_operator(B), w_metric, w_metric.apply(mx), cfg)
    p_first = v - U.apply(M.adjoint.apply(dual))

    kernel_part = project_kernel_metric(M, U, v)
    jb = metric_resolvent(B, k_metric, mx, cfg)
    p_second = kernel_part + U.apply(M.adjoint.apply(w_metric.apply(jb)))
    return p_first, p_second


def resolvent_composed_full_range(
    problem: CompositionProblem, x, cfg: ToleranceConfig = DEFAULTS
) -> Array:
    p_first, p_second = resolvent_composed_full_range_pair(problem, x, cfg)
    gap = float(np.linalg.norm(p_first - p_second))
    if gap > 2 * cfg.tol_inner:
        log.warning("full-range self-check gap %.3e exceeds %.1e", gap, 2 * cfg.tol_inner)
    else:
        log.debug("full-range self-check gap %.3e", gap)
    return p_first


def resolvent_dispatch(problem: CompositionProblem, x, cfg: ToleranceConfig = DEFAULTS):
    """Evaluate J_{U M*BM} x following the problem's route choice.

    Returns (value, route used, inner report or None).  ``auto`` prefers the
    full-range route when the rank allows, then the pseudoinverse route.
    """
    route = problem.route
    if route == AUTO:
        route = FULL_RANGE if numerical_rank(problem.M, cfg) == problem.M.rows else CLOSED_RANGE
    if route == GENERAL:
        value, report = resolvent_composed_report(problem, x, cfg)
        return value, route, report
    if route == CLOSED_RANGE:
        value, report = resolvent_composed_closed_range_report(problem, x, cfg)
        return value, route, report
    return resolvent_composed_full_range(problem, x, cfg), route, None


# -- parallel composition L |> A = (L A^{-1} L*)^{-1} --------------------------


def _parallel_inner_solve(A, qmat, rhs, cfg):
    """Forward-backward on 0 in A(w) + Q w - rhs with Q = L* U^{-1} L."""
    lip = operator_norm(LinearMap(qmat), cfg) if np.any(qmat) else 0.0
    gamma = 0.9 / lip if lip > 0 else 1.0

    def forward(w):
        return qmat @ w - rhs

    w, stats = solvers.forward_backward(A.resolve, forward, np.zeros(A.dim), gamma, cfg)
    status = _STATUS_MAP[stats.status]
    report = InnerSolveReport(stats.iterations, stats.residual, w if status == "converged" else None, status)
    return _require_converged(report, "parallel composition"), report


def resolvent_parallel_composition(
    A: MonotoneOperator,
    L: LinearMap,
    U: Metric,
    x,
    route: str = GENERAL,
    cfg: ToleranceConfig = DEFAULTS,
) -> Array:
    """J_{U (L |> A)} x.

    ``general`` solves the strongly regularized inclusion
    0 in A(w) + L* U^{-1} L w - L* U^{-1} x and returns L w; ``closed_range``
    lifts through (sqrt(U^{-1}) L)^+ first; ``full_range`` needs ran L* to be
    the whole inner space and uses a dense inverse of L* U^{-1} L.
    """
    v = as_vector(x, U.dim)
    if L.rows != U.dim:
        raise DimensionMismatch(f"map codomain {L.rows} != metric dimension {U.dim}")
    if A.dim != L.cols:
        raise DimensionMismatch(f"operator dimension {A.dim} != map domain {L.cols}")
    if route == AUTO:
        route = FULL_RANGE if numerical_rank(L, cfg) == L.cols else CLOSED_RANGE

    u_inv = U.U_inv.mat
    qmat = L.mat.T @ u_inv @ L.mat
    qmat = 0.5 * (qmat + qmat.T)

    if route == GENERAL:
        rhs = L.mat.T @ (u_inv @ v)
        w, _ = _parallel_inner_solve(A, qmat, rhs, cfg)
        return L.apply(w)
    if route == CLOSED_RANGE:
        s = U.U_inv_sqrt.mat @ L.mat
        y = svd_factors(s).pinv_matrix() @ U.apply_inv_sqrt(v)
        w, _ = _parallel_inner_solve(A, qmat, qmat @ y, cfg)
        return L.apply(w)
    if route == FULL_RANGE:
        if numerical_rank(L, cfg) < L.cols:
            raise RankDeficient(
                f"full-range route needs rank {L.cols}, map has rank {numerical_rank(L, cfg)}"
            )
        w_metric = spd_sqrt(qmat, cfg).inverse()
        y = w_metric.apply(L.mat.T @ (u_inv @ v))
        return L.apply(metric_resolvent(A, w_metric, y, cfg))
    raise ValueError(f"unknown route {route!r}")


def parallel_sum_resolvent(
    B: MonotoneOperator, C: MonotoneOperator, x, cfg: ToleranceConfig = DEFAULTS
) -> Array:
    """Resolvent of the parallel sum (B^{-1} + C^{-1})^{-1}.

    Built as a parallel composition on the product space with the summing map
    (w1, w2) -> w1 + w2.
    """
    if B.dim != C.dim:
        raise DimensionMismatch(f"parallel sum needs equal dimensions, got {B.dim} and {C.dim}")
    d = B.dim
    A = direct_sum(B, C)
    L = LinearMap(np.hstack([np.eye(d), np.eye(d)]))
    return resolvent_parallel_composition(A, L, Metric.identity(d), x, GENERAL, cfg)
