"""Exception hierarchy shared by every module of the package."""


class FDAError(Exception):
    """Base class for all errors raised by :mod:`fdclass`."""


class DimensionError(FDAError, ValueError):
    """Curves or grids with incompatible lengths."""


class ParameterError(FDAError, ValueError):
    """A tuning or model parameter is outside its admissible range."""


class InsufficientDataError(FDAError, ValueError):
    """Too few curves (or an empty class) for the requested computation."""


class HypothesisError(FDAError, ValueError):
    """A process pair violates the conditions needed for a closed-form density ratio."""


class EvaluationError(FDAError, ValueError):
    """A model function returned non-finite values."""


class SingularCovarianceError(FDAError, ArithmeticError):
    """Cholesky factorization failed even after jitter escalation."""


class OracleUnavailableError(FDAError, ArithmeticError):
    """The finite-dimensional density oracle cannot be evaluated."""


class FitError(FDAError, ArithmeticError):
    """A classifier could not be fitted to the supplied sample."""


class UnsupportedError(FDAError, ValueError):
    """The requested method does not apply to the requested model."""


class ParseError(FDAError, ValueError):
    """Malformed dataset file.

    Parameters
    ----------
    message : str
        What went wrong.
    line : int or None
        1-based line number in the offending file.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
