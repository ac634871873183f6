"""Exception types shared across the package."""


class FracMTError(Exception):
    """Base class for all package errors."""


class InputError(FracMTError, ValueError):
    """Raised when an argument violates an operation's precondition."""


class AccuracyError(FracMTError, ArithmeticError):
    """Raised when a quadrature exhausts its panel budget.

    The best available estimate and its error bound travel with the
    exception so callers can still inspect them.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
