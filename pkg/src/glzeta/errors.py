"""Exception types shared across the package."""


class GLDomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class GLConvergenceError(ArithmeticError):
    """A series or quadrature failed to reach its tolerance.

    The best available estimate and its error bound are kept on the
    exception so callers can decide whether a partial answer is usable.
    """

    def __init__(self, message, estimate=float("nan"), error=float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class FitError(RuntimeError):
    """Every optimizer restart failed to produce a finite objective."""
