"""Alternating-direction solver for min f(x) + g(Lx) with a metric penalty.

The x-update is a generalized prox evaluation prox_{f,L}^U(z - w); only its
image Lx (which is single-valued even for rank-deficient L) feeds the z and
w updates, so the iteration stays well defined without uniqueness of x.  A
non-attained x-update aborts the run: it is the runtime signature of a
qualification-condition violation.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .catalog import ConvexFunction, prox_metric
from .config import DEFAULTS, ToleranceConfig
from .errors import MaxIterations, NotAttained
from .linalg import LinearMap, Metric, operator_norm
from .postcompose import UNKNOWN, VIOLATED, prox_infcomp, qualification_hint

Array = np.ndarray
log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IterationRecord:
    index: int
    x_norm: float
    z_norm: float
    primal_residual: float
    dual_residual: float


@dataclass
class RunReport:
    """Outcome of one solve: iterate history plus final state and flags."""

    task: str
    converged: bool
    iterations: int
    final_objective: float
    x: Array
    z: Array
    w: Array
    records: list = field(default_factory=list)
    all_x_updates_attained: bool = True
    qualification: str = UNKNOWN
    wall_time: float = 0.0
    tolerances: dict = field(default_factory=dict)


def admm_solve(
    f: ConvexFunction,
    g: ConvexFunction,
    L: LinearMap,
    U: Optional[Metric] = None,
    cfg: ToleranceConfig = DEFAULTS,
) -> RunReport:
    """Run the splitting iteration until both residuals drop below tol_admm.

    x+ minimizes f(x) + (1/2)||Lx - (z - w)||_U^2, z+ is the U-metric prox of
    g at Lx+ + w, and w accumulates the constraint gap.  U defaults to the
    identity; a scalar metric rho*Id recovers the classical penalty
    parameter.  Raises NotAttained when an x-update has no minimizer and
    MaxIterations (with the partial report attached) when the budget runs
    out.
    """
    start_time = time.perf_counter()
    if U is None:
        U = Metric.identity(L.rows)
    if g.dim != L.rows:
        raise ValueError(f"g has dimension {g.dim}, expected {L.rows}")
    hint = qualification_hint(f, L)
    if hint == VIOLATED:
        log.warning("qualification hint is 'violated': x-updates may not attain their minimum")
    elif hint == UNKNOWN:
        log.warning("qualification hint is 'unknown' for kind %r", f.kind)

    lip = operator_norm(LinearMap(L.mat.T @ U.U.mat @ L.mat), cfg)
    z = np.zeros(L.rows)
    w = np.zeros(L.rows)
    x = np.zeros(L.cols)
    records = []
    report = RunReport(
        task="solve",
        converged=False,
        iterations=0,
        final_objective=float("nan"),
        x=x,
        z=z,
        w=w,
        records=records,
        qualification=hint,
        tolerances={
            "tol_admm": cfg.tol_admm,
            "tol_fix": cfg.tol_fix,
            "admm_max_iter": cfg.admm_max_iter,
            "max_iter": cfg.max_iter,
        },
    )

    for k in range(1, cfg.admm_max_iter + 1):
        result = prox_infcomp(f, L, U, z - w, cfg, x0=x, lipschitz=lip)
        if not result.attained:
            report.all_x_updates_attained = False
            report.iterations = k
            report.wall_time = time.perf_counter() - start_time
            raise NotAttained(
                f"x-update {k} did not attain its minimum ({result.explanation}); "
                f"qualification hint was {hint!r}"
            )
        x = result.representative
        lx = result.image
        z_new = prox_metric(g, U, lx + w, cfg)
        primal = float(np.linalg.norm(lx - z_new))
        dual = float(np.linalg.norm(L.mat.T @ U.apply(z_new - z)))
        w = w + lx - z_new
        z = z_new
        records.append(
            IterationRecord(k, float(np.linalg.norm(x)), float(np.linalg.norm(z)), primal, dual)
        )
        if max(primal, dual) <= cfg.tol_admm:
            report.converged = True
            report.iterations = k
            break
    else:
        report.iterations = cfg.admm_max_iter
        report.x, report.z, report.w = x, z, w
        report.wall_time = time.perf_counter() - start_time
        raise MaxIterations(
            f"splitting did not reach {cfg.tol_admm:.1e} in {cfg.admm_max_iter} iterations",
            report=report,
        )

    report.x, report.z, report.w = x, z, w
    report.final_objective = float(f.value(x) + g.value(L.apply(x)))
    report.wall_time = time.perf_counter() - start_time
    return report
