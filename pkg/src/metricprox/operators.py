"""Set-valued maximally monotone operators presented through resolvent oracles.

An operator is a resolvent oracle ``(gamma, x) -> J_{gamma A} x`` plus an
optional forward evaluation for single-valued operators.  Inversion goes
through the resolvent identity J_{gamma A^{-1}}(x) = x - gamma J_{A/gamma}(x/gamma),
metric resolvents J_{UA} have closed forms for affine and subdifferential
kinds and fall back to a forward-backward solve, and warped resolvents
(K + A)^{-1} K come with a sampling-based diagnostic for their domain and
single-valuedness.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import DEFAULTS, ToleranceConfig
from .errors import (
    DimensionMismatch,
    InnerSolverDiverged,
    NotFound,
    NotMonotone,
    Unsupported,
)
from .linalg import LinearMap, Metric, as_matrix, as_vector, operator_norm
from . import solvers

Array = np.ndarray

AFFINE = "affine"
SUBDIFFERENTIAL = "subdifferential"
NORMAL_CONE = "normal_cone"
INVERSE_OF = "inverse_of"
CUSTOM = "custom"


@dataclass(frozen=True)
class MonotoneOperator:
    """Maximally monotone operator with a resolvent oracle.

    ``resolvent(gamma, x)`` must return J_{gamma A} x for any gamma > 0.
    ``forward`` is present only for single-valued operators.  ``metric_hook``
    computes J_{UA} x in closed form when the kind allows it.
    """

    dim: int
    resolvent: Callable[[float, Array], Array]
    forward: Optional[Callable[[Array], Array]] = None
    kind: str = CUSTOM
    metric_hook: Optional[Callable[[Metric, Array], Array]] = None
    inverse_hint: Optional["MonotoneOperator"] = None
    affine_parts: Optional[tuple] = field(default=None, repr=False)

    def resolve(self, gamma: float, x) -> Array:
        if gamma <= 0:
            raise ValueError(f"resolvent parameter must be positive, got {gamma}")
        return self.resolvent(gamma, as_vector(x, self.dim))

    def evaluate(self, x) -> Array:
        if self.forward is None:
            raise Unsupported(f"operator of kind {self.kind!r} has no forward evaluation")
        return self.forward(as_vector(x, self.dim))


def affine_operator(A_mat, b=None, tol: ToleranceConfig = DEFAULTS) -> MonotoneOperator:
    """Operator x -> A x + b; monotone iff the symmetric part of A is PSD."""
    a = as_matrix(A_mat)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"affine operator matrix must be square, got {a.shape}")
    dim = a.shape[0]
    bv = np.zeros(dim) if b is None else as_vector(b, dim, "offset")
    sym_eigs = np.linalg.eigvalsh(0.5 * (a + a.T))
    if sym_eigs[0] < -tol.eigen_floor:
        raise NotMonotone(
            f"symmetric part has eigenvalue {sym_eigs[0]:.3e} < -{tol.eigen_floor:.1e}"
        )
    eye = np.eye(dim)

    def resolvent(gamma, x):
        return np.linalg.solve(eye + gamma * a, x - gamma * bv)

    def forward(x):
        return a @ x + bv

    def metric_hook(U, x):
        return np.linalg.solve(eye + U.U.mat @ a, x - U.apply(bv))

    return MonotoneOperator(
        dim=dim,
        resolvent=resolvent,
        forward=forward,
        kind=AFFINE,
        metric_hook=metric_hook,
        affine_parts=(a, bv),
    )


def zero_operator(dim: int) -> MonotoneOperator:
    return affine_operator(np.zeros((dim, dim)))


def inverse_operator(A: MonotoneOperator) -> MonotoneOperator:
    """A^{-1} through the resolvent identity; no forward oracle in general."""

    def resolvent(gamma, x):
        return x - gamma * A.resolve(1.0 / gamma, x / gamma)

    def metric_hook(U, x):
        return x - U.apply(metric_resolvent(A, U.inverse(), U.apply_inv(x)))

    return MonotoneOperator(
        dim=A.dim,
        resolvent=resolvent,
        kind=INVERSE_OF,
        metric_hook=metric_hook,
        inverse_hint=A,
    )


def direct_sum(*ops: MonotoneOperator) -> MonotoneOperator:
    """Block operator (x_1, ..., x_k) -> A_1 x_1 x ... x A_k x_k."""
    dims = [op.dim for op in ops]
    offsets = np.concatenate([[0], np.cumsum(dims)])
    total = int(offsets[-1])

    def split(x):
        return [x[offsets[i] : offsets[i + 1]] for i in range(len(ops))]

    def resolvent(gamma, x):
        return np.concatenate([op.resolve(gamma, p) for op, p in zip(ops, split(x))])

    forward = None
    if all(op.forward is not None for op in ops):
        def forward(x):  # noqa: F811 - conditional definition
            return np.concatenate([op.evaluate(p) for op, p in zip(ops, split(x))])

    return MonotoneOperator(dim=total, resolvent=resolvent, forward=forward, kind=CUSTOM)


def as_custom(A: MonotoneOperator) -> MonotoneOperator:
    """Strip closed-form payloads so all metric solves take the iterative path."""
    return MonotoneOperator(dim=A.dim, resolvent=A.resolvent, forward=A.forward, kind=CUSTOM)


def metric_resolvent(A: MonotoneOperator, U: Metric, x, cfg: ToleranceConfig = DEFAULTS) -> Array:
    """J_{UA} x for an SPD metric U.

    Scalar metrics reduce to the resolvent oracle, affine/subdifferential and
    inverse kinds are handled by their closed-form hooks, anything else is
    solved by forward-backward on 0 in A(p) + U^{-1}(p - x).
    """
    v = as_vector(x, U.dim)
    if A.dim != U.dim:
        raise DimensionMismatch(f"operator dimension {A.dim} != metric dimension {U.dim}")
    if U.is_scalar:
        return A.resolve(U.scalar, v)
    if A.metric_hook is not None:
        return A.metric_hook(U, v)

    u_inv = U.U_inv.mat
    target = u_inv @ v
    gamma = 0.9 * U.mu  # 0.9 / ||U^{-1}||

    def forward(p):
        return u_inv @ p - target

    p, stats = solvers.forward_backward(A.resolve, forward, v, gamma, cfg)
    if stats.status == solvers.CONVERGED:
        return p
    if stats.status == solvers.BLOWUP:
        raise NotFound(f"metric resolvent diverged after {stats.iterations} iterations")
    raise InnerSolverDiverged(
        f"metric resolvent {stats.status} after {stats.iterations} iterations "
        f"(residual {stats.residual:.3e})",
        iterations=stats.iterations,
        residual=stats.residual,
    )


@dataclass(frozen=True)
class WarpedKernel:
    """Kernel map K for warped resolvents (K + A)^{-1} K."""

    dim: int
    kernel_map: Callable[[Array], Array]
    is_linear: bool = False
    linear_form: Optional[LinearMap] = None
    lipschitz: Optional[float] = None

    def apply(self, x) -> Array:
        return np.asarray(self.kernel_map(as_vector(x, self.dim)), dtype=float)

    @staticmethod
    def from_linear(M, tol: ToleranceConfig = DEFAULTS) -> "WarpedKernel":
        form = M if isinstance(M, LinearMap) else LinearMap(M)
        if form.rows != form.cols:
            raise DimensionMismatch("warped kernels must map a space to itself")
        return WarpedKernel(
            dim=form.rows,
            kernel_map=form.apply,
            is_linear=True,
            linear_form=form,
            lipschitz=operator_norm(form, tol),
        )


@dataclass(frozen=True)
class WarpedDiagnostics:
    """Sampling-based evidence about a warped resolvent.

    ``injectivity_violations`` holds triples (p, q, image): distinct points
    whose images under K + A coincide to tolerance.  Absence of witnesses is
    not a proof of single-valuedness.
    """

    sampled_domain_hits: int
    injectivity_violations: tuple


def _kernel_gamma(K: WarpedKernel, cfg: ToleranceConfig) -> float:
    if K.is_linear and K.linear_form is not None:
        lip = K.lipschitz if K.lipschitz is not None else operator_norm(K.linear_form, cfg)
    else:
        lip = K.lipschitz
    if lip is None:
        raise Unsupported("nonlinear warped kernels need a known Lipschitz constant")
    return 0.9 / lip if lip > 0 else 1.0


def _warped_solve(A: MonotoneOperator, K: WarpedKernel, target: Array, start: Array, cfg):
    """Forward-backward on target in (K + A)(p)."""
    gamma = _kernel_gamma(K, cfg)

    def forward(p):
        return K.apply(p) - target

    return solvers.forward_backward(A.resolve, forward, start, gamma, cfg)


def warped_resolvent(A: MonotoneOperator, K: WarpedKernel, x, cfg: ToleranceConfig = DEFAULTS) -> Array:
    """(K + A)^{-1} K x.

    For a linear invertible kernel this equals J_{K^{-1} A}; SPD kernels are
    routed through the metric machinery.  Otherwise a forward-backward solve
    runs on the inclusion; a NotFound error means the residual target was not
    met, which is a legitimate outcome since the domain can be a strict
    subset of the space.
    """
    v = as_vector(x, K.dim)
    if A.dim != K.dim:
        raise DimensionMismatch(f"operator dimension {A.dim} != kernel dimension {K.dim}")
    if A.forward is None and not K.is_linear:
        raise Unsupported("warped resolvents need a forward oracle or a linear kernel")
    if K.is_linear and K.linear_form is not None:
        kmat = K.linear_form.mat
        sym_ok = np.linalg.norm(kmat - kmat.T, "fro") <= 1e-12 * max(np.linalg.norm(kmat, "fro"), 1e-300)
        if sym_ok and np.linalg.eigvalsh(0.5 * (kmat + kmat.T))[0] > DEFAULTS.eigen_floor:
            from .linalg import spd_sqrt

            return metric_resolvent(A, spd_sqrt(kmat).inverse(), v, cfg)
        if A.forward is None and np.linalg.matrix_rank(kmat) < K.dim:
            raise Unsupported("singular linear kernel without a forward oracle")

    p, stats = _warped_solve(A, K, K.apply(v), v, cfg)
    if stats.status == solvers.CONVERGED:
        return p
    if stats.status == solvers.BLOWUP:
        raise NotFound(
            f"no warped-resolvent value found (iterates diverged after {stats.iterations} steps)"
        )
    raise InnerSolverDiverged(
        f"warped resolvent {stats.status} after {stats.iterations} iterations "
        f"(residual {stats.residual:.3e})",
        iterations=stats.iterations,
        residual=stats.residual,
    )


def warped_diagnostics(
    A: MonotoneOperator,
    K: WarpedKernel,
    samples,
    starts=(),
    cfg: ToleranceConfig = DEFAULTS,
    match_tol: float = 1e-8,
    separation: float = 1e-5,
) -> WarpedDiagnostics:
    """Probe domain coverage and injectivity of K + A by sampling.

    For each sample z the inclusion K z in (K + A)(p) is solved from several
    starts; a sample counts as a domain hit when any start converges.  All
    candidate points (samples, starts, converged solutions) are then scanned
    pairwise: distinct points whose K + A images agree to ``match_tol`` are
    recorded as injectivity-violation witnesses.  Best effort only.
    """
    if A.forward is None:
        raise Unsupported("diagnostics need a forward oracle for the operator")
    sample_vecs = [as_vector(s, K.dim, "sample") for s in samples]
    start_vecs = [as_vector(s, K.dim, "start") for s in starts]

    hits = 0
    candidates = []
    for z in sample_vecs:
        target = K.apply(z)
        attempts = start_vecs + [np.zeros(K.dim), z]
        found = False
        for s in attempts:
            p, stats = _warped_solve(A, K, target, s, cfg)
            if stats.status == solvers.CONVERGED:
                found = True
                candidates.append(p)
        if found:
            hits += 1

    candidates.extend(sample_vecs)
    candidates.extend(start_vecs)

    def image(p):
        return K.apply(p) + A.evaluate(p)

    images = [image(c) for c in candidates]
    violations = []
    for i in range(len(candidates)):
        for j in range(i + 1, len(candidates)):
            p, q = candidates[i], candidates[j]
            if np.linalg.norm(p - q) <= separation:
                continue
            if np.linalg.norm(images[i] - images[j]) <= match_tol:
                lo, hi = (p, q) if tuple(p) <= tuple(q) else (q, p)
                if not any(
                    np.linalg.norm(lo - w[0]) <= separation
                    and np.linalg.norm(hi - w[1]) <= separation
                    for w in violations
                ):
                    violations.append((lo, hi, images[i]))
    return WarpedDiagnostics(sampled_domain_hits=hits, injectivity_violations=tuple(violations))
