"""Catalog of proper lower-semicontinuous convex functions.

Each member carries a value oracle (batch-friendly: accepts a single vector
or an (N, dim) stack), an exact prox oracle, and a conjugate handle.  The
conjugate link is involutive: ``f.conjugate.conjugate is f``.  Metric
proximity operators prox^U_f minimize f(y) + (1/2)||x - y||_U^2; diagonal
metrics on separable functions stay closed-form, everything else runs an
accelerated proximal-gradient solve.
"""

import math
from typing import Callable, Optional

import numpy as np

from .config import DEFAULTS, ToleranceConfig
from .errors import DimensionMismatch, InnerSolverDiverged
from .linalg import LinearMap, Metric, as_matrix, as_vector, svd_factors
from .operators import MonotoneOperator, SUBDIFFERENTIAL
from . import solvers

Array = np.ndarray


def _as_points(x, dim):
    """Normalize to an (N, dim) stack plus a flag for single-vector input."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        if a.shape[0] != dim:
            raise DimensionMismatch(f"point has dimension {a.shape[0]}, expected {dim}")
        return a.reshape(1, dim), True
    if a.ndim == 2 and a.shape[1] == dim:
        return a, False
    raise DimensionMismatch(f"expected shape ({dim},) or (N, {dim}), got {a.shape}")


class ConvexFunction:
    """Proper lsc convex function with value, prox, and conjugate oracles."""

    def __init__(
        self,
        dim: int,
        value: Callable[[Array], Array],
        prox: Callable[[float, Array], Array],
        kind: str,
        coordinate_prox: Optional[Callable[[int, float, float], float]] = None,
        grad: Optional[Callable[[Array], Array]] = None,
        conjugate_domain: tuple = ("unknown",),
        conjugate_factory: Optional[Callable[[], "ConvexFunction"]] = None,
        full_domain: bool = False,
    ):
        self.dim = int(dim)
        self.kind = kind
        self._value = value
        self._prox = prox
        self.coordinate_prox = coordinate_prox
        self.grad = grad
        self.conjugate_domain = conjugate_domain
        self.full_domain = full_domain
        self._conjugate_factory = conjugate_factory
        self._conjugate: Optional[ConvexFunction] = None

    def __repr__(self):
        return f"ConvexFunction(kind={self.kind!r}, dim={self.dim})"

    @property
    def separable(self) -> bool:
        return self.coordinate_prox is not None

    def value(self, x):
        """f(x); +inf outside the domain.  Accepts (dim,) or (N, dim)."""
        pts, single = _as_points(x, self.dim)
        out = self._value(pts)
        return float(out[0]) if single else np.asarray(out, dtype=float)

    def prox(self, gamma: float, x) -> Array:
        if gamma <= 0:
            raise ValueError(f"prox parameter must be positive, got {gamma}")
        return self._prox(gamma, as_vector(x, self.dim))

    @property
    def conjugate(self) -> "ConvexFunction":
        if self._conjugate is None:
            if self._conjugate_factory is None:
                raise NotImplementedError(f"no conjugate available for kind {self.kind!r}")
            conj = self._conjugate_factory()
            conj._conjugate = self
            self._conjugate = conj
        return self._conjugate

    def subdifferential(self) -> MonotoneOperator:
        """The subdifferential as a monotone operator; resolvent = prox."""

        def hook(U, x):
            return prox_metric(self, U.inverse(), x)

        return MonotoneOperator(
            dim=self.dim,
            resolvent=self._prox,
            forward=self.grad,
            kind=SUBDIFFERENTIAL,
            metric_hook=hook,
        )


def _moreau_prox(f: ConvexFunction):
    """prox of f* from prox of f: prox_{g f*}(x) = x - g prox_{f/g}(x/g)."""

    def prox(gamma, x):
        return x - gamma * f.prox(1.0 / gamma, x / gamma)

    return prox


# -- constructors -------------------------------------------------------------


def quadratic(A, b=None, constant: float = 0.0, tol: ToleranceConfig = DEFAULTS) -> ConvexFunction:
    """f(x) = (1/2) x'Ax + b'x + constant with A symmetric PSD."""
    a = as_matrix(A)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"quadratic matrix must be square, got {a.shape}")
    dim = a.shape[0]
    bv = np.zeros(dim) if b is None else as_vector(b, dim, "linear term")
    a = 0.5 * (a + a.T)
    eigs = np.linalg.eigvalsh(a)
    if eigs[0] < -tol.eigen_floor:
        raise ValueError(f"quadratic matrix must be PSD, smallest eigenvalue {eigs[0]:.3e}")
    eye = np.eye(dim)
    invertible = eigs[0] > tol.eigen_floor

    def value(pts):
        return 0.5 * np.einsum("ni,ij,nj->n", pts, a, pts) + pts @ bv + constant

    def prox(gamma, x):
        return np.linalg.solve(eye + gamma * a, x - gamma * bv)

    coordinate_prox = None
    if np.count_nonzero(a - np.diag(np.diag(a))) == 0:
        diag = np.diag(a)

        def coordinate_prox(i, gamma, xi):  # noqa: F811
            return (xi - gamma * bv[i]) / (1.0 + gamma * diag[i])

    def conjugate_factory():
        if invertible:
            a_inv = np.linalg.inv(a)
            return quadratic(
                a_inv,
                -a_inv @ bv,
                constant=0.5 * float(bv @ a_inv @ bv) - constant,
                tol=tol,
            )
        return _singular_quadratic_conjugate(a, bv, constant, f)

    f = ConvexFunction(
        dim=dim,
        value=value,
        prox=prox,
        kind="quadratic",
        coordinate_prox=coordinate_prox,
        grad=lambda x: a @ x + bv,
        conjugate_domain=("full",) if invertible else ("affine", bv, _range_basis(a)),
        conjugate_factory=conjugate_factory,
        full_domain=True,
    )
    return f


def _range_basis(a) -> Array:
    fac = svd_factors(a)
    return np.array(fac.left[:, : fac.rank])


def _singular_quadratic_conjugate(a, bv, constant, primal) -> ConvexFunction:
    """Conjugate of a singular PSD quadratic: a pinv quadratic on b + ran A."""
    fac = svd_factors(a)
    a_pinv = fac.pinv_matrix()
    basis = fac.left[:, : fac.rank]
    dim = a.shape[0]

    def value(pts):
        c = pts - bv
        # distance to ran A decides membership
        off = c - (c @ basis) @ basis.T if fac.rank else c
        inside = np.linalg.norm(off, axis=-1) <= 1e-8 * (1.0 + np.linalg.norm(pts, axis=-1))
        vals = 0.5 * np.einsum("ni,ij,nj->n", c, a_pinv, c) - constant
        return np.where(inside, vals, np.inf)

    return ConvexFunction(
        dim=dim,
        value=value,
        prox=_moreau_prox(primal),
        kind="quadratic_conjugate",
        conjugate_domain=("full",),
        full_domain=False,
    )


def l1(dim: int, lam: float = 1.0) -> ConvexFunction:
    """f(x) = lam * ||x||_1."""
    if lam <= 0:
        raise ValueError(f"l1 weight must be positive, got {lam}")

    def value(pts):
        return lam * np.sum(np.abs(pts), axis=-1)

    def prox(gamma, x):
        t = gamma * lam
        return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)

    def coordinate_prox(i, gamma, xi):
        t = gamma * lam
        return math.copysign(max(abs(xi) - t, 0.0), xi)

    def conjugate_factory():
        return indicator_box(dim, -lam, lam)

    return ConvexFunction(
        dim=dim,
        value=value,
        prox=prox,
        kind="l1",
        coordinate_prox=coordinate_prox,
        conjugate_domain=("bounded_zero_interior",),
        conjugate_factory=conjugate_factory,
        full_domain=True,
    )


def indicator_box(dim: int, lo, hi) -> ConvexFunction:
    """Indicator of the box {lo <= x <= hi}; bounds broadcast, +-inf allowed."""
    lo_v = np.broadcast_to(np.asarray(lo, dtype=float), (dim,)).copy()
    hi_v = np.broadcast_to(np.asarray(hi, dtype=float), (dim,)).copy()
    if np.any(lo_v > hi_v):
        raise ValueError("box lower bounds must not exceed upper bounds")

    def value(pts):
        slack = 1e-12 * (1.0 + np.abs(pts))
        inside = np.all((pts >= lo_v - slack) & (pts <= hi_v + slack), axis=-1)
        return np.where(inside, 0.0, np.inf)

    def prox(gamma, x):
        return np.clip(x, lo_v, hi_v)

    def coordinate_prox(i, gamma, xi):
        return min(max(xi, lo_v[i]), hi_v[i])

    finite = bool(np.all(np.isfinite(lo_v)) and np.all(np.isfinite(hi_v)))
    zero_interior = finite and bool(np.all(lo_v < 0) and np.all(hi_v > 0))

    def conjugate_factory():
        return _box_support(dim, lo_v, hi_v, f, zero_interior)

    f = ConvexFunction(
        dim=dim,
        value=value,
        prox=prox,
        kind="indicator_box",
        coordinate_prox=coordinate_prox,
        conjugate_domain=("full",) if finite else ("unknown",),
        conjugate_factory=conjugate_factory,
        full_domain=False,
    )
    return f


def _box_support(dim, lo_v, hi_v, primal, zero_interior) -> ConvexFunction:
    def value(pts):
        out = np.zeros(pts.shape[0])
        for i in range(dim):
            u = pts[:, i]
            s = np.zeros_like(u)
            pos = u > 0
            neg = u < 0
            s[pos] = hi_v[i] * u[pos]
            s[neg] = lo_v[i] * u[neg]
            out = out + s
        return out

    return ConvexFunction(
        dim=dim,
        value=value,
        prox=_moreau_prox(primal),
        kind="box_support",
        conjugate_domain=("bounded_zero_interior",) if zero_interior else ("unknown",),
        full_domain=bool(np.all(np.isfinite(lo_v)) and np.all(np.isfinite(hi_v))),
    )


def indicator_ball(dim: int, center=0.0, radius: float = 1.0) -> ConvexFunction:
    """Indicator of the Euclidean ball of the given center and radius."""
    if radius <= 0:
        raise ValueError(f"ball radius must be positive, got {radius}")
    c = np.broadcast_to(np.asarray(center, dtype=float), (dim,)).copy()

    def value(pts):
        dist = np.linalg.norm(pts - c, axis=-1)
        return np.where(dist <= radius * (1 + 1e-12) + 1e-12, 0.0, np.inf)

    def prox(gamma, x):
        d = x - c
        n = np.linalg.norm(d)
        if n <= radius:
            return x.copy()
        return c + (radius / n) * d

    def conjugate_factory():
        def svalue(pts):
            return pts @ c + radius * np.linalg.norm(pts, axis=-1)

        return ConvexFunction(
            dim=dim,
            value=svalue,
            prox=_moreau_prox(f),
            kind="ball_support",
            conjugate_domain=(
                ("bounded_zero_interior",) if np.linalg.norm(c) < radius else ("unknown",)
            ),
            full_domain=True,
        )

    f = ConvexFunction(
        dim=dim,
        value=value,
        prox=prox,
        kind="indicator_ball",
        conjugate_domain=("full",),
        conjugate_factory=conjugate_factory,
        full_domain=False,
    )
    return f


def indicator_affine(C, d, tol: ToleranceConfig = DEFAULTS) -> ConvexFunction:
    """Indicator of the affine set {x : Cx = d}; d must lie in ran C."""
    cmap = C if isinstance(C, LinearMap) else LinearMap(C)
    dv = as_vector(d, cmap.rows, "affine target")
    dim = cmap.cols
    c_pinv = svd_factors(cmap.mat).pinv_matrix()
    x0 = c_pinv @ dv
    if np.linalg.norm(cmap.mat @ x0 - dv) > 1e-9 * (1.0 + np.linalg.norm(dv)):
        raise ValueError("affine indicator is empty: target not in the range of the map")
    proj_range_adj = cmap.mat.T @ np.linalg.pinv(cmap.mat.T)  # projector onto ran C*

    def value(pts):
        resid = np.linalg.norm(pts @ cmap.mat.T - dv, axis=-1)
        return np.where(resid <= 1e-8 * (1.0 + np.linalg.norm(dv)), 0.0, np.inf)

    def prox(gamma, x):
        return x - c_pinv @ (cmap.mat @ x - dv)

    def conjugate_factory():
        def svalue(pts):
            off = pts - pts @ proj_range_adj.T
            inside = np.linalg.norm(off, axis=-1) <= 1e-8 * (1.0 + np.linalg.norm(pts, axis=-1))
            return np.where(inside, pts @ x0, np.inf)

        fac = svd_factors(cmap.mat)
        return ConvexFunction(
            dim=dim,
            value=svalue,
            prox=_moreau_prox(f),
            kind="affine_support",
            conjugate_domain=("affine", x0, np.array(fac.right[:, fac.rank :])),
            full_domain=False,
        )

    fac = svd_factors(cmap.mat)
    f = ConvexFunction(
        dim=dim,
        value=value,
        prox=prox,
        kind="indicator_affine",
        conjugate_domain=("affine", np.zeros(dim), np.array(fac.right[:, : fac.rank])),
        conjugate_factory=conjugate_factory,
        full_domain=False,
    )
    return f


def zero(dim: int) -> ConvexFunction:
    """The zero function; prox is the identity."""

    def conjugate_factory():
        return _point_indicator(dim, np.zeros(dim), f)

    f = ConvexFunction(
        dim=dim,
        value=lambda pts: np.zeros(pts.shape[0]),
        prox=lambda gamma, x: x.copy(),
        kind="zero",
        coordinate_prox=lambda i, gamma, xi: xi,
        grad=lambda x: np.zeros(dim),
        conjugate_domain=("point", np.zeros(dim)),
        conjugate_factory=conjugate_factory,
        full_domain=True,
    )
    return f


def linear(c) -> ConvexFunction:
    """f(x) = <c, x>."""
    cv = as_vector(c, name="slope")
    dim = cv.shape[0]

    def conjugate_factory():
        return _point_indicator(dim, cv, f)

    f = ConvexFunction(
        dim=dim,
        value=lambda pts: pts @ cv,
        prox=lambda gamma, x: x - gamma * cv,
        kind="linear",
        coordinate_prox=lambda i, gamma, xi: xi - gamma * cv[i],
        grad=lambda x: cv.copy(),
        conjugate_domain=("point", cv),
        conjugate_factory=conjugate_factory,
        full_domain=True,
    )
    return f


def _point_indicator(dim, point, primal) -> ConvexFunction:
    def value(pts):
        dist = np.linalg.norm(pts - point, axis=-1)
        return np.where(dist <= 1e-10 * (1.0 + np.linalg.norm(point)), 0.0, np.inf)

    return ConvexFunction(
        dim=dim,
        value=value,
        prox=lambda gamma, x: point.copy(),
        kind="point_indicator",
        coordinate_prox=lambda i, gamma, xi: float(point[i]),
        conjugate_domain=("full",),
        full_domain=False,
    )


def _exp_prox_scalar(gamma: float, z: float) -> float:
    """Solve p + gamma*exp(p) = z by safeguarded Newton with a bisection bracket."""

    def g(p):
        return p + gamma * math.exp(min(p, 700.0)) - z

    hi = z  # g(z) = gamma*exp(z) > 0
    lo = z - max(1.0, gamma)
    step = max(1.0, gamma)
    while g(lo) > 0:
        step *= 2.0
        lo = z - step
    p = 0.5 * (lo + hi)
    for _ in range(200):
        gp = g(p)
        if abs(gp) <= 1e-14 * (1.0 + abs(z)):
            return p
        if gp > 0:
            hi = p
        else:
            lo = p
        deriv = 1.0 + gamma * math.exp(min(p, 700.0))
        p_next = p - gp / deriv
        if not (lo < p_next < hi):
            p_next = 0.5 * (lo + hi)
        p = p_next
    return p


def separable_exp(dim: int, index: int) -> ConvexFunction:
    """f(x) = exp(x_index); the other coordinates are unconstrained."""
    if not 0 <= index < dim:
        raise ValueError(f"coordinate index {index} out of range for dimension {dim}")

    def value(pts):
        return np.exp(np.minimum(pts[:, index], 700.0))

    def prox(gamma, x):
        out = x.copy()
        out[index] = _exp_prox_scalar(gamma, x[index])
        return out

    def coordinate_prox(i, gamma, xi):
        return _exp_prox_scalar(gamma, xi) if i == index else xi

    def grad(x):
        g = np.zeros(dim)
        g[index] = math.exp(min(x[index], 700.0))
        return g

    def conjugate_factory():
        def cvalue(pts):
            v = pts[:, index]
            off = np.delete(pts, index, axis=1)
            on_axis = (
                np.linalg.norm(off, axis=-1) <= 1e-10 * (1.0 + np.abs(v)) if dim > 1 else np.ones(len(v), bool)
            )
            with np.errstate(divide="ignore", invalid="ignore"):
                pos = v * (np.log(np.where(v > 0, v, 1.0)) - 1.0)
            vals = np.where(v > 0, pos, np.where(v == 0, 0.0, np.inf))
            return np.where(on_axis, vals, np.inf)

        return ConvexFunction(
            dim=dim,
            value=cvalue,
            prox=_moreau_prox(f),
            kind="exp_conjugate",
            conjugate_domain=("full",),
            full_domain=False,
        )

    f = ConvexFunction(
        dim=dim,
        value=value,
        prox=prox,
        kind="separable_exp",
        coordinate_prox=coordinate_prox,
        grad=grad,
        conjugate_domain=("axis_halfline", index),
        conjugate_factory=conjugate_factory,
        full_domain=True,
    )
    return f


# -- metric proximity operators -----------------------------------------------


def prox_metric(f: ConvexFunction, U: Metric, x, cfg: ToleranceConfig = DEFAULTS) -> Array:
    """Unique minimizer of f(y) + (1/2)||x - y||_U^2.

    Scalar metrics reduce to the catalog prox, diagonal metrics on separable
    functions go coordinate by coordinate, anything else runs FISTA on the
    strongly convex objective.
    """
    v = as_vector(x, f.dim)
    if U.dim != f.dim:
        raise DimensionMismatch(f"metric dimension {U.dim} != function dimension {f.dim}")
    if U.is_scalar:
        return f.prox(1.0 / U.scalar, v)
    if f.separable and U.is_diagonal:
        d = U.diagonal
        return np.array([f.coordinate_prox(i, 1.0 / d[i], v[i]) for i in range(f.dim)])

    umat = U.U.mat

    def grad(y):
        return umat @ (y - v)

    p, stats = solvers.fista(f._prox, grad, U.norm_bound, v, cfg)
    if stats.status != solvers.CONVERGED:
        raise InnerSolverDiverged(
            f"metric prox {stats.status} after {stats.iterations} iterations "
            f"(residual {stats.residual:.3e})",
            iterations=stats.iterations,
            residual=stats.residual,
        )
    return p


def conjugate_prox_metric(f: ConvexFunction, U: Metric, x, cfg: ToleranceConfig = DEFAULTS) -> Array:
    """prox^{U^{-1}}_{f*}(x) via the metric Moreau decomposition.

    Rearranges prox^U_f = Id - U^{-1} prox^{U^{-1}}_{f*} U so only the primal
    prox of f is required.
    """
    v = as_vector(x, f.dim)
    shifted = U.apply_inv(v)
    return U.apply(shifted - prox_metric(f, U, shifted, cfg))
