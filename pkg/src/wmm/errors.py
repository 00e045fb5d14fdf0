"""Exception types raised across the package."""


class WmmError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(WmmError, ValueError):
    """A matrix order, decay parameter or grid parameter is out of range."""


class DimensionError(WmmError, ValueError):
    """Vector length does not match the operator order."""


class DenseLimitError(WmmError, ValueError):
    """Dense materialization requested above the configured size cap."""


class SingularMatrixError(WmmError, ArithmeticError):
    """Pivot magnitude fell below the singularity threshold."""


class NotSymmetricError(WmmError, ValueError):
    pass


class ConvergenceError(WmmError, RuntimeError):
    """An iterative method did not converge within its iteration budget."""

    def __init__(self, message, iterations):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


class DegenerateOrderError(WmmError, ValueError):
    """The requested quantity is undefined for this matrix order."""


class SinkhornUnderflowError(WmmError, ArithmeticError):
    """A Sinkhorn scaling vector underflowed or overflowed."""


class DistributionError(WmmError, ValueError):
    """A distribution source could not be parsed or is invalid."""

    def __init__(self, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
