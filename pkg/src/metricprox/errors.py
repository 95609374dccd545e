"""Exception types shared across the package."""


class MetricProxError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(MetricProxError):
    """Operand shapes do not chain."""


class NotSymmetric(MetricProxError):
    """Matrix failed the symmetry tolerance check."""


class NotPositiveDefinite(MetricProxError):
    """An eigenvalue fell at or below the positivity floor."""


class NotMonotone(MetricProxError):
    """Symmetric part of an affine map has a negative eigenvalue."""


class RankDeficient(MetricProxError):
    """A full-range route was requested but the map does not have full rank."""


class DimensionTooLarge(MetricProxError):
    """Grid oracles only run in dimension <= 3."""


class Unsupported(MetricProxError):
    """The requested operation is outside the supported input class."""


class NotFound(MetricProxError):
    """No point met the residual target; the requested value may not exist."""


class NotAttained(MetricProxError):
    """An infimum was detected to be unattained (qualification violation)."""


class MaxIterations(MetricProxError):
    """Outer iteration budget exhausted before reaching the tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InnerSolverDiverged(MetricProxError):
    """Inner iterative solve stagnated or exhausted its budget."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class SpecError(MetricProxError):
    """Problem-specification file is malformed."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column
