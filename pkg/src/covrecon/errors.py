"""Exception hierarchy shared across the package."""


class CovReconError(Exception):
    """Base class for all covrecon errors."""


class ValidationError(CovReconError):
    """Input fails a structural requirement (symmetry, shape, correlations)."""


class NotPositiveSemidefiniteError(ValidationError):
    """Matrix has an eigenvalue below the PSD tolerance."""


class DegenerateVarianceError(CovReconError):
    """Covariance matrix has a zero or negative diagonal entry."""


class SingularMatrixError(CovReconError):
    """Inverse application requested for a numerically singular matrix."""


class NotInvertibleError(CovReconError):
    """Operation requires a full-rank covariance matrix."""


class NoOpRequestError(CovReconError):
    """Requested target condition number does not reduce the current one."""


class InvalidTargetError(CovReconError):
    """Target condition number must exceed 1."""


class InvalidParamsError(CovReconError):
    """Norm or search parameters outside their admissible range."""


class InsufficientSamplesError(CovReconError):
    """Sample covariance needs at least two draws."""


class DimensionMismatchError(CovReconError):
    """Vectors or matrices have inconsistent dimensions."""


class NumericalBreakdownError(CovReconError):
    """Iteration produced non-finite values or lost positive definiteness."""


class MatrixParseError(CovReconError):
    """CSV matrix file is malformed; carries the offending location."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.column = column
