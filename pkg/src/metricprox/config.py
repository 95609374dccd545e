"""Single tolerance configuration shared by every module."""

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances and iteration budgets.

    All engines take one of these; the defaults are the documented contract
    values and any field can be overridden per call site.
    """

    sym_rtol: float = 1e-12          # symmetry check, relative Frobenius
    eigen_floor: float = 1e-10       # positive-definiteness floor
    factor_tol: float = 1e-10        # cached-factor reconstruction checks
    pinv_tol: float = 1e-8           # Moore-Penrose identity checks
    rank_scale: float = 1e-12        # numerical-rank rule: max(m,n)*sigma_max*rank_scale
    power_rtol: float = 1e-8         # power-iteration relative tolerance
    power_max_iter: int = 10000
    tol_fix: float = 1e-10           # fixed-point residual stop
    tol_inner: float = 1e-8          # certified inclusion-residual target
    max_iter: int = 100_000
    fista_restart: int = 200         # momentum reset period
    divergence_norm: float = 1e8     # iterate blowup threshold
    stall_window: int = 1000         # non-attainment: objective-stall window
    stall_decrease: float = 1e-14    # minimal window decrease before a stall is declared
    stall_residual_factor: float = 100.0
    tol_admm: float = 1e-8
    admm_max_iter: int = 50_000

    def with_overrides(self, **kwargs) -> "ToleranceConfig":
        return dataclasses.replace(self, **kwargs)


DEFAULTS = ToleranceConfig()
