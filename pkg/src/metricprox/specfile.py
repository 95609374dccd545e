"""Line-oriented problem-specification files for the command line.

A spec names matrices (shared plain-text blocks), picks a metric, describes
the convex functions through the catalog grammar, and points at the vectors
a task consumes.  Parsing is two-phase: collect statements with line/column
positions, then resolve references and chain-check dimensions before any
solver runs.
"""

from dataclasses import dataclass, field

import numpy as np

from .catalog import (
    ConvexFunction,
    indicator_affine,
    indicator_box,
    l1,
    quadratic,
    separable_exp,
    zero,
)
from .config import DEFAULTS, ToleranceConfig
from .errors import SpecError
from .linalg import LinearMap, Metric, parse_matrix_lines, spd_sqrt
from .operators import MonotoneOperator, affine_operator

TASKS = ("prox-eval", "resolvent-eval", "verify", "solve")
_INT_TOL_FIELDS = {"max_iter", "fista_restart", "stall_window", "admm_max_iter", "power_max_iter"}


@dataclass
class ProblemSpec:
    """Parsed but unresolved problem description."""

    task: str | None = None
    matrices: dict = field(default_factory=dict)
    metric_spec: tuple = ("identity",)
    f_spec: list | None = None
    g_spec: list | None = None
    L_ref: str | None = None
    M_ref: str | None = None
    point_ref: str | None = None
    operator_spec: list | None = None
    route: str = "auto"
    tol_overrides: dict = field(default_factory=dict)
    seed: int | None = None
    count: int | None = None
    lines: dict = field(default_factory=dict)  # statement -> line number, for diagnostics

    def tolerances(self) -> ToleranceConfig:
        return DEFAULTS.with_overrides(**self.tol_overrides)


def _column_of(line_text: str, token_index: int) -> int:
    pos = 0
    for i, tok in enumerate(line_text.split()):
        pos = line_text.index(tok, pos)
        if i == token_index:
            return pos + 1
        pos += len(tok)
    return 1


def parse_problem_text(text: str) -> ProblemSpec:
    spec = ProblemSpec()
    lines = text.splitlines()
    i = 0
    n = len(lines)
    while i < n:
        raw = lines[i]
        lineno = i + 1
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            i += 1
            continue
        tokens = stripped.split()
        key = tokens[0]

        def fail(msg, tok_idx=0):
            raise SpecError(msg, line=lineno, column=_column_of(raw, tok_idx))

        def need(count_, usage):
            if len(tokens) != count_:
                fail(f"expected `{usage}`", tok_idx=min(len(tokens) - 1, count_ - 1))

        if key == "task":
            need(2, "task <name>")
            if tokens[1] not in TASKS:
                fail(f"unknown task {tokens[1]!r}; expected one of {', '.join(TASKS)}", 1)
            spec.task = tokens[1]
        elif key == "matrix":
            need(2, "matrix <name>")
            name = tokens[1]
            if name in spec.matrices:
                fail(f"matrix {name!r} defined twice", 1)
            block_start = i + 1
            header = None
            j = block_start
            while j < n and not lines[j].split("#", 1)[0].strip():
                j += 1
            if j >= n:
                fail(f"matrix {name!r} block missing its 'rows cols' header")
            header = lines[j].split("#", 1)[0].split()
            try:
                rows = int(header[0])
            except (ValueError, IndexError):
                raise SpecError(
                    f"matrix {name!r} header must be 'rows cols'", line=j + 1, column=1
                ) from None
            block = [lines[k].split("#", 1)[0] for k in range(j, min(j + rows + 1, n))]
            try:
                spec.matrices[name] = parse_matrix_lines(block)
            except ValueError as exc:
                raise SpecError(f"matrix {name!r}: {exc}", line=j + 1, column=1) from None
            spec.lines[f"matrix:{name}"] = lineno
            i = j + rows + 1
            continue
        elif key == "metric":
            if len(tokens) < 2:
                fail("expected `metric identity|diag <name>|dense <name>|scaled <rho>`")
            mode = tokens[1]
            if mode == "identity":
                need(2, "metric identity")
                spec.metric_spec = ("identity",)
            elif mode in ("diag", "dense"):
                need(3, f"metric {mode} <name>")
                spec.metric_spec = (mode, tokens[2])
            elif mode == "scaled":
                need(3, "metric scaled <rho>")
                try:
                    spec.metric_spec = ("scaled", float(tokens[2]))
                except ValueError:
                    fail(f"scale must be a number, got {tokens[2]!r}", 2)
            else:
                fail(f"unknown metric mode {mode!r}", 1)
        elif key in ("f", "g"):
            if len(tokens) < 2:
                fail(f"expected `{key} <kind> [args...]`")
            setattr(spec, f"{key}_spec", tokens[1:])
            spec.lines[key] = lineno
        elif key == "L":
            need(2, "L <matrix-name>")
            spec.L_ref = tokens[1]
            spec.lines["L"] = lineno
        elif key == "M":
            need(2, "M <matrix-name>")
            spec.M_ref = tokens[1]
            spec.lines["M"] = lineno
        elif key == "point":
            need(2, "point <matrix-name>")
            spec.point_ref = tokens[1]
            spec.lines["point"] = lineno
        elif key == "operator":
            if len(tokens) < 2:
                fail("expected `operator affine <mat> <vec>` or `operator subdifferential <f-spec>`")
            spec.operator_spec = tokens[1:]
            spec.lines["operator"] = lineno
        elif key == "route":
            need(2, "route general|closed_range|full_range|auto")
            if tokens[1] not in ("general", "closed_range", "full_range", "auto"):
                fail(f"unknown route {tokens[1]!r}", 1)
            spec.route = tokens[1]
        elif key == "tol":
            need(3, "tol <field> <value>")
            name = tokens[1]
            if name not in ToleranceConfig.__dataclass_fields__:
                fail(f"unknown tolerance field {name!r}", 1)
            try:
                val = float(tokens[2])
            except ValueError:
                fail(f"tolerance value must be numeric, got {tokens[2]!r}", 2)
            spec.tol_overrides[name] = int(val) if name in _INT_TOL_FIELDS else val
        elif key in ("seed", "count"):
            need(2, f"{key} <integer>")
            try:
                setattr(spec, key, int(tokens[1]))
            except ValueError:
                fail(f"{key} must be an integer, got {tokens[1]!r}", 1)
        else:
            fail(f"unknown statement {key!r}")
        i += 1
    return spec


def parse_problem_file(path) -> ProblemSpec:
    with open(path) as fh:
        return parse_problem_text(fh.read())


# -- reference resolution -------------------------------------------------------


def _lookup(spec: ProblemSpec, name: str, what: str) -> np.ndarray:
    if name not in spec.matrices:
        raise SpecError(f"{what} references undefined matrix {name!r}", line=spec.lines.get(what))
    return spec.matrices[name]


def _as_vec(spec: ProblemSpec, name: str, what: str) -> np.ndarray:
    m = _lookup(spec, name, what)
    if 1 not in m.shape:
        raise SpecError(
            f"{what} needs a vector, but {name!r} has shape {m.shape[0]}x{m.shape[1]}",
            line=spec.lines.get(what),
        )
    return m.reshape(-1)


def resolve_function(spec: ProblemSpec, tokens: list, dim: int, what: str) -> ConvexFunction:
    """Build a catalog member from its grammar line, at the given dimension."""
    kind = tokens[0]
    line = spec.lines.get(what)

    def fail(msg):
        raise SpecError(f"{what}: {msg}", line=line)

    try:
        if kind == "l1":
            if len(tokens) != 2:
                fail("usage: l1 <lambda>")
            return l1(dim, float(tokens[1]))
        if kind == "quadratic":
            if len(tokens) != 3:
                fail("usage: quadratic <matrix-ref> <vector-ref>")
            a = _lookup(spec, tokens[1], what)
            b = _as_vec(spec, tokens[2], what)
            if a.shape != (dim, dim) or b.shape != (dim,):
                fail(
                    f"quadratic needs a {dim}x{dim} matrix and a {dim}-vector, "
                    f"got {a.shape} and {b.shape}"
                )
            return quadratic(a, b)
        if kind == "box":
            if len(tokens) != 3:
                fail("usage: box <lo> <hi>")
            return indicator_box(dim, float(tokens[1]), float(tokens[2]))
        if kind == "exp":
            if len(tokens) != 2:
                fail("usage: exp <index>")
            return separable_exp(dim, int(tokens[1]))
        if kind == "zero":
            if len(tokens) != 1:
                fail("usage: zero")
            return zero(dim)
        if kind == "affine":
            if len(tokens) != 3:
                fail("usage: affine <matrix-ref> <vector-ref>")
            c = _lookup(spec, tokens[1], what)
            d = _as_vec(spec, tokens[2], what)
            if c.shape[1] != dim or d.shape != (c.shape[0],):
                fail(
                    f"affine needs a (k x {dim}) matrix and a matching k-vector, "
                    f"got {c.shape} and {d.shape}"
                )
            return indicator_affine(LinearMap(c), d)
    except SpecError:
        raise
    except Exception as exc:  # constructor preconditions
        raise SpecError(f"{what}: {exc}", line=line) from None
    fail(f"unknown function kind {kind!r}")


def resolve_metric(spec: ProblemSpec, dim: int) -> Metric:
    mode = spec.metric_spec[0]
    try:
        if mode == "identity":
            return Metric.identity(dim)
        if mode == "scaled":
            return Metric.scaled(spec.metric_spec[1], dim)
        if mode == "diag":
            v = _as_vec(spec, spec.metric_spec[1], "metric")
            if v.shape != (dim,):
                raise SpecError(f"diagonal metric needs {dim} entries, got {v.shape[0]}")
            return Metric.diag(v)
        if mode == "dense":
            m = _lookup(spec, spec.metric_spec[1], "metric")
            if m.shape != (dim, dim):
                raise SpecError(f"dense metric must be {dim}x{dim}, got {m.shape}")
            return spd_sqrt(m)
    except SpecError:
        raise
    except Exception as exc:
        raise SpecError(f"metric: {exc}") from None
    raise SpecError(f"unknown metric mode {mode!r}")


def resolve_operator(spec: ProblemSpec, dim: int) -> MonotoneOperator:
    tokens = spec.operator_spec
    line = spec.lines.get("operator")
    if tokens[0] == "affine":
        if len(tokens) != 3:
            raise SpecError("usage: operator affine <matrix-ref> <vector-ref>", line=line)
        a = _lookup(spec, tokens[1], "operator")
        b = _as_vec(spec, tokens[2], "operator")
        if a.shape != (dim, dim) or b.shape != (dim,):
            raise SpecError(
                f"operator needs a {dim}x{dim} matrix and a {dim}-vector, "
                f"got {a.shape} and {b.shape}",
                line=line,
            )
        try:
            return affine_operator(a, b)
        except Exception as exc:
            raise SpecError(f"operator: {exc}", line=line) from None
    if tokens[0] == "subdifferential":
        if len(tokens) < 2:
            raise SpecError("usage: operator subdifferential <f-spec>", line=line)
        spec.lines["operator-f"] = line
        return resolve_function(spec, tokens[1:], dim, "operator-f").subdifferential()
    raise SpecError(f"unknown operator kind {tokens[0]!r}", line=line)


def _required(spec: ProblemSpec, attr: str, statement: str):
    value = getattr(spec, attr)
    if value is None:
        raise SpecError(f"task requires a `{statement}` statement")
    return value


def build_prox_eval(spec: ProblemSpec):
    """Resolve (f, L, U, u, cfg) for a prox-eval task."""
    u_vec = _as_vec(spec, _required(spec, "point_ref", "point"), "point")
    lmap = LinearMap(_lookup(spec, _required(spec, "L_ref", "L"), "L"))
    if lmap.rows != u_vec.shape[0]:
        raise SpecError(
            f"point has dimension {u_vec.shape[0]} but the map produces {lmap.rows}",
            line=spec.lines.get("point"),
        )
    metric = resolve_metric(spec, lmap.rows)
    f = resolve_function(spec, _required(spec, "f_spec", "f"), lmap.cols, "f")
    return f, lmap, metric, u_vec, spec.tolerances()


def build_resolvent_eval(spec: ProblemSpec):
    """Resolve (problem, x, cfg) for a resolvent-eval task."""
    from .compose import CompositionProblem

    x = _as_vec(spec, _required(spec, "point_ref", "point"), "point")
    dim_g = x.shape[0]
    if spec.M_ref is not None:
        mmap = LinearMap(_lookup(spec, spec.M_ref, "M"))
        if mmap.cols != dim_g:
            raise SpecError(
                f"map domain {mmap.cols} != point dimension {dim_g}", line=spec.lines.get("M")
            )
    else:
        mmap = LinearMap(np.eye(dim_g))
    metric = resolve_metric(spec, dim_g)
    if spec.operator_spec is not None:
        op = resolve_operator(spec, mmap.rows)
    elif spec.f_spec is not None:
        op = resolve_function(spec, spec.f_spec, mmap.rows, "f").subdifferential()
    else:
        raise SpecError("task requires an `operator` or `f` statement")
    return CompositionProblem(op, mmap, metric, route=spec.route), x, spec.tolerances()


def build_solve(spec: ProblemSpec):
    """Resolve (f, g, L, U, cfg) for a solve task."""
    lmap = LinearMap(_lookup(spec, _required(spec, "L_ref", "L"), "L"))
    metric = resolve_metric(spec, lmap.rows)
    f = resolve_function(spec, _required(spec, "f_spec", "f"), lmap.cols, "f")
    g = resolve_function(spec, _required(spec, "g_spec", "g"), lmap.rows, "g")
    return f, g, lmap, metric, spec.tolerances()
