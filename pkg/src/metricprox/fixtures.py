"""Named constructors for the two counterexample fixtures.

``saturating_kernel_pair`` builds the one-dimensional kernel K = clip to
[-1, 1] together with A = alpha K.  K + A is injective on ran K but not on
the whole line (every point >= 1 maps to 1 + alpha), which is exactly what
the warped diagnostics are meant to witness.

``unattained_exp_problem`` builds f(x, y) = exp(y) with the projection
L(x, y) = x.  The infimum over the fiber is never attained, so generalized
prox evaluations must report non-attainment and the qualification hint must
flag the pair.
"""

import numpy as np

from .catalog import ConvexFunction, separable_exp
from .linalg import LinearMap
from .operators import MonotoneOperator, WarpedKernel


def _clip(x):
    return np.clip(x, -1.0, 1.0)


def _scaled_clip_resolvent(alpha):
    def resolvent(gamma, x):
        # solve p + gamma*alpha*clip(p) = z componentwise
        c = gamma * alpha
        z = np.asarray(x, dtype=float)
        inner = z / (1.0 + c)
        out = np.where(z > 1.0 + c, z - c, np.where(z < -(1.0 + c), z + c, inner))
        return out

    return resolvent


def saturating_kernel_pair(alpha: float = 1.0):
    """Kernel K = clip to [-1, 1] on the line and the operator A = alpha K."""
    if alpha <= 0:
        raise ValueError(f"scale must be positive, got {alpha}")
    A = MonotoneOperator(
        dim=1,
        resolvent=_scaled_clip_resolvent(alpha),
        forward=lambda x: alpha * _clip(x),
        kind="custom",
    )
    K = WarpedKernel(dim=1, kernel_map=_clip, is_linear=False, lipschitz=1.0)
    return A, K


def unattained_exp_problem() -> tuple[ConvexFunction, LinearMap]:
    """f(x, y) = exp(y) with L(x, y) = x; the fiber infimum is unattained."""
    return separable_exp(2, 1), LinearMap(np.array([[1.0, 0.0]]))
