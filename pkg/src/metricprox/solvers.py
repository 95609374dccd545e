"""Internal iterative drivers: forward-backward and accelerated proximal gradient.

Both loops report one of four statuses:

* ``converged`` -- residual target met,
* ``blowup``    -- iterate norm crossed the divergence threshold (or went
  non-finite), interpreted by callers as "the requested point may not exist",
* ``stalled``   -- progress stopped while the residual target was still unmet,
* ``max_iter``  -- iteration budget exhausted.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULTS, ToleranceConfig

CONVERGED = "converged"
BLOWUP = "blowup"
STALLED = "stalled"
MAX_ITER = "max_iter"


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    residual: float
    status: str


def _bad(x) -> bool:
    return not np.all(np.isfinite(x))


def forward_backward(resolvent, forward, x0, gamma, cfg: ToleranceConfig = DEFAULTS):
    """Solve 0 in A(x) + C(x) by x+ = J_{gamma A}(x - gamma C(x)).

    ``resolvent(gamma, z)`` evaluates J_{gamma A}; ``forward`` evaluates the
    single-valued part C.  The reported residual is a certified inclusion
    residual: the backward step yields an exact element a = (z - x+)/gamma of
    A(x+), so ||C(x+) + a|| bounds the distance of 0 to (A + C)(x+).
    """
    x = np.asarray(x0, dtype=float)
    fx = forward(x)
    residual = math.inf
    for k in range(1, cfg.max_iter + 1):
        z = x - gamma * fx
        x_new = resolvent(gamma, z)
        if _bad(x_new) or np.linalg.norm(x_new) > cfg.divergence_norm:
            return x_new, SolveStats(k, math.inf, BLOWUP)
        fx_new = forward(x_new)
        a = (z - x_new) / gamma
        residual = float(np.linalg.norm(fx_new + a))
        if residual <= cfg.tol_inner:
            return x_new, SolveStats(k, residual, CONVERGED)
        if np.linalg.norm(x_new - x) <= cfg.tol_fix:
            return x_new, SolveStats(k, residual, STALLED)
        x, fx = x_new, fx_new
    return x, SolveStats(cfg.max_iter, residual, MAX_ITER)


def fista(prox, grad, lipschitz, x0, cfg: ToleranceConfig = DEFAULTS, value=None):
    """Minimize f(x) + g(x) with g smooth (gradient ``grad``, constant
    ``lipschitz``) and f proximable (``prox(gamma, z)``).

    Accelerated proximal gradient with periodic momentum restart.  Stops on
    the prox-gradient fixed-point residual; when a ``value`` oracle is given,
    an objective stall with a large residual is reported as ``stalled``
    (non-attainment pattern for unbounded descent directions).
    """
    gamma = 1.0 / lipschitz if lipschitz > 0 else 1.0
    x = np.asarray(x0, dtype=float)
    y = x
    t = 1.0
    last_obj = value(x) if value is not None else None
    residual = math.inf
    for k in range(1, cfg.max_iter + 1):
        x_new = prox(gamma, y - gamma * grad(y))
        if _bad(x_new) or np.linalg.norm(x_new) > cfg.divergence_norm:
            return x_new, SolveStats(k, math.inf, BLOWUP)
        residual = float(np.linalg.norm(x_new - y))
        if residual <= cfg.tol_fix:
            return x_new, SolveStats(k, residual, CONVERGED)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, t = x_new, t_new
        if k % cfg.fista_restart == 0:
            y, t = x, 1.0
        if value is not None and k % cfg.stall_window == 0:
            obj = value(x)
            if (
                last_obj - obj < cfg.stall_decrease
                and residual > cfg.stall_residual_factor * cfg.tol_fix
            ):
                return x, SolveStats(k, residual, STALLED)
            last_obj = obj
    return x, SolveStats(cfg.max_iter, residual, MAX_ITER)
