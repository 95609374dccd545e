"""Dense linear-algebra substrate.

Linear maps with adjoints, symmetric positive-definite metrics with cached
factor matrices, SVD-based pseudoinverses with a numerical-rank cutoff, and
the pair of metric projections onto the kernel of a map and the range of the
metric-weighted adjoint.  Everything is immutable after construction and all
operations are pure, so concurrent use needs no locking.
"""

from dataclasses import dataclass

import numpy as np

from .config import DEFAULTS, ToleranceConfig
from .errors import DimensionMismatch, NotPositiveDefinite, NotSymmetric

Array = np.ndarray


def _freeze(a) -> Array:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


def as_vector(x, dim=None, name="vector") -> Array:
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"{name} has dimension {v.shape[0]}, expected {dim}")
    return v


@dataclass(frozen=True)
class LinearMap:
    """Dense real matrix acting as a map from R^cols to R^rows."""

    mat: Array

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=float)
        if m.ndim != 2:
            raise DimensionMismatch(f"matrix must be two-dimensional, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "mat", _freeze(m))

    @property
    def rows(self) -> int:
        return self.mat.shape[0]

    @property
    def cols(self) -> int:
        return self.mat.shape[1]

    def apply(self, x) -> Array:
        return self.mat @ as_vector(x, self.cols)

    __call__ = apply

    @property
    def adjoint(self) -> "LinearMap":
        return LinearMap(self.mat.T)

    def compose(self, other: "LinearMap") -> "LinearMap":
        if self.cols != other.rows:
            raise DimensionMismatch(
                f"cannot compose ({self.rows}x{self.cols}) with ({other.rows}x{other.cols})"
            )
        return LinearMap(self.mat @ other.mat)

    @staticmethod
    def identity(n: int) -> "LinearMap":
        return LinearMap(np.eye(n))

    @staticmethod
    def zero(rows: int, cols: int) -> "LinearMap":
        return LinearMap(np.zeros((rows, cols)))


def as_matrix(m) -> Array:
    """Accept a LinearMap or array-like and return the underlying 2-D array."""
    if isinstance(m, LinearMap):
        return m.mat
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Metric:
    """SPD operator U with cached inverse, square root and inverse square root.

    ``eigenvalues``/``eigenvectors`` hold the spectral factorization the caches
    were built from; ``mu`` is the smallest eigenvalue (strong-monotonicity
    constant).
    """

    dim: int
    U: LinearMap
    U_inv: LinearMap
    U_sqrt: LinearMap
    U_inv_sqrt: LinearMap
    mu: float
    eigenvalues: Array
    eigenvectors: Array

    def apply(self, x) -> Array:
        return self.U.apply(x)

    def apply_inv(self, x) -> Array:
        return self.U_inv.apply(x)

    def apply_sqrt(self, x) -> Array:
        return self.U_sqrt.apply(x)

    def apply_inv_sqrt(self, x) -> Array:
        return self.U_inv_sqrt.apply(x)

    def inner(self, a, b) -> float:
        return float(as_vector(a, self.dim) @ self.apply(b))

    def norm(self, a) -> float:
        return float(np.sqrt(max(self.inner(a, a), 0.0)))

    @property
    def norm_bound(self) -> float:
        """Largest eigenvalue of U (Lipschitz constant of x -> Ux)."""
        return float(self.eigenvalues[-1])

    @property
    def is_scalar(self) -> bool:
        w = self.eigenvalues
        return bool(w[-1] - w[0] <= 1e-14 * w[-1])

    @property
    def scalar(self) -> float:
        return float(self.eigenvalues.mean())

    @property
    def is_diagonal(self) -> bool:
        return bool(np.count_nonzero(self.U.mat - np.diag(np.diag(self.U.mat))) == 0)

    @property
    def diagonal(self) -> Array:
        return np.diag(self.U.mat)

    def inverse(self) -> "Metric":
        """Metric for U^{-1}, reusing the cached factors."""
        w = (1.0 / self.eigenvalues)[::-1]
        q = self.eigenvectors[:, ::-1]
        return Metric(
            dim=self.dim,
            U=self.U_inv,
            U_inv=self.U,
            U_sqrt=self.U_inv_sqrt,
            U_inv_sqrt=self.U_sqrt,
            mu=float(w[0]),
            eigenvalues=_freeze(w),
            eigenvectors=_freeze(q),
        )

    @staticmethod
    def identity(dim: int) -> "Metric":
        return spd_sqrt(np.eye(dim))

    @staticmethod
    def scaled(rho: float, dim: int) -> "Metric":
        if rho <= 0:
            raise NotPositiveDefinite(f"scale must be positive, got {rho}")
        return spd_sqrt(rho * np.eye(dim))

    @staticmethod
    def diag(values) -> "Metric":
        return spd_sqrt(np.diag(as_vector(values)))


def spd_sqrt(U, tol: ToleranceConfig = DEFAULTS) -> Metric:
    """Factor a symmetric positive-definite matrix into a Metric.

    Raises NotSymmetric if the symmetry check fails (relative Frobenius) and
    NotPositiveDefinite if any eigenvalue is at or below the floor.
    """
    a = as_matrix(U)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"metric matrix must be square, got shape {a.shape}")
    scale = np.linalg.norm(a, "fro")
    skew = np.linalg.norm(a - a.T, "fro")
    if skew > tol.sym_rtol * max(scale, 1e-300):
        raise NotSymmetric(f"asymmetry {skew:.3e} exceeds {tol.sym_rtol:.1e} * {scale:.3e}")
    sym = 0.5 * (a + a.T)
    w, q = np.linalg.eigh(sym)
    if w[0] <= tol.eigen_floor:
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} <= floor {tol.eigen_floor:.1e}")
    dim = a.shape[0]

    def rebuild(f):
        return LinearMap(q @ np.diag(f(w)) @ q.T)

    return Metric(
        dim=dim,
        U=LinearMap(sym),
        U_inv=rebuild(lambda v: 1.0 / v),
        U_sqrt=rebuild(np.sqrt),
        U_inv_sqrt=rebuild(lambda v: 1.0 / np.sqrt(v)),
        mu=float(w[0]),
        eigenvalues=_freeze(w),
        eigenvectors=_freeze(q),
    )


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD with a numerical-rank cutoff; values below it count as zero."""

    left: Array
    values: Array
    right: Array
    rank_cutoff: float

    @property
    def rank(self) -> int:
        return int(np.sum(self.values > self.rank_cutoff))

    def reconstruct(self) -> Array:
        return (self.left * self.values) @ self.right.T

    def pinv_matrix(self) -> Array:
        r = self.rank
        if r == 0:
            return np.zeros((self.right.shape[0], self.left.shape[0]))
        return (self.right[:, :r] / self.values[:r]) @ self.left[:, :r].T


def svd_factors(M, rank_cutoff=None, tol: ToleranceConfig = DEFAULTS) -> SvdFactors:
    a = as_matrix(M)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if rank_cutoff is None:
        top = float(s[0]) if s.size else 0.0
        rank_cutoff = max(a.shape) * top * tol.rank_scale
    return SvdFactors(_freeze(u), _freeze(s), _freeze(vt.T), float(rank_cutoff))


def pseudoinverse(M, rank_cutoff=None, tol: ToleranceConfig = DEFAULTS) -> LinearMap:
    """Moore-Penrose inverse via SVD; rank deficiency handled by the cutoff."""
    return LinearMap(svd_factors(M, rank_cutoff, tol).pinv_matrix())


def numerical_rank(M, tol: ToleranceConfig = DEFAULTS) -> int:
    return svd_factors(M, tol=tol).rank


def operator_norm(M, tol: ToleranceConfig = DEFAULTS) -> float:
    """Largest singular value by power iteration on M*M."""
    a = as_matrix(M)
    n = a.shape[1]
    if n == 0 or a.shape[0] == 0 or not np.any(a):
        return 0.0
    # deterministic start with a seeded perturbation so that an exactly
    # orthogonal ones-vector cannot stall the iteration
    rng = np.random.default_rng(0)
    v = np.ones(n) + 1e-3 * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(tol.power_max_iter):
        w = a.T @ (a @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        lam_new = float(v @ w)
        v = w / nw
        if abs(lam_new - lam) <= tol.power_rtol * max(lam_new, 1e-300):
            lam = lam_new
            break
        lam = lam_new
    return float(np.sqrt(max(lam, 0.0)))


def _range_projector(M: LinearMap, U: Metric) -> Array:
    """Matrix of the projection onto ran(U M*), orthogonal in the U^{-1} inner
    product; built from one SVD so that kernel + range parts sum exactly."""
    s = U.U_sqrt.mat @ M.mat.T
    s_pinv = svd_factors(s).pinv_matrix()
    return U.U.mat @ M.mat.T @ s_pinv @ U.U_inv_sqrt.mat


def project_range_metric(M: LinearMap, U: Metric, x) -> Array:
    v = as_vector(x, U.dim)
    if M.cols != U.dim:
        raise DimensionMismatch(f"map acts on dimension {M.cols}, metric has {U.dim}")
    return _range_projector(M, U) @ v


def project_kernel_metric(M: LinearMap, U: Metric, x) -> Array:
    """Projection of x onto ker M, orthogonal in the U^{-1} inner product."""
    v = as_vector(x, U.dim)
    if M.cols != U.dim:
        raise DimensionMismatch(f"map acts on dimension {M.cols}, metric has {U.dim}")
    return v - _range_projector(M, U) @ v


# -- plain-text serialization (used by the CLI problem format) ---------------


def format_matrix(a) -> str:
    """Serialize: first line "rows cols", then one line per row."""
    if isinstance(a, LinearMap):
        m = a.mat
    else:
        m = np.asarray(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionMismatch(f"can only serialize vectors and matrices, got shape {m.shape}")
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    for row in m:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> Array:
    lines = [ln for ln in text.splitlines()]
    return parse_matrix_lines(lines)


def parse_matrix_lines(lines) -> Array:
    """Parse the serialized form; raises ValueError with a line index."""
    idx = 0
    while idx < len(lines) and not lines[idx].strip():
        idx += 1
    if idx >= len(lines):
        raise ValueError("empty matrix block")
    header = lines[idx].split()
    if len(header) != 2:
        raise ValueError(f"matrix header must be 'rows cols', got {lines[idx]!r}")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise ValueError(f"matrix header must contain integers, got {lines[idx]!r}") from None
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix dimensions must be positive, got {rows}x{cols}")
    out = np.empty((rows, cols))
    for r in range(rows):
        idx += 1
        if idx >= len(lines):
            raise ValueError(f"matrix block ended after {r} of {rows} rows")
        parts = lines[idx].split()
        if len(parts) != cols:
            raise ValueError(f"row {r + 1} has {len(parts)} entries, expected {cols}")
        try:
            out[r] = [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"row {r + 1} contains a non-numeric entry") from None
    return out


def write_matrix(path, a) -> None:
    with open(path, "w") as fh:
        fh.write(format_matrix(a))


def read_matrix(path) -> Array:
    with open(path) as fh:
        return parse_matrix(fh.read())
