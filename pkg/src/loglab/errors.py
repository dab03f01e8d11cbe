"""Exception types raised across the package."""


class DomainError(ValueError):
    """Evaluation point outside the closed unit interval."""


class SingularOperatorError(ArithmeticError):
    """A tridiagonal elimination hit a (numerically) zero pivot."""

    def __init__(self, message, pivot=None, index=None):
        super().__init__(message)
        self.pivot = pivot
        self.index = index


class SolverFailure(RuntimeError):
    """Newton (or continuation) did not converge."""

    def __init__(self, message, residual=None, mu=None):
        super().__init__(message)
        self.residual = residual
        self.mu = mu


class StepSizeError(RuntimeError):
    """Time stepping lost positivity; retry with a smaller dt."""


class MeanPositivityError(ValueError):
    """The large-diffusion expansion needs a strictly positive mean resource."""


class InsufficientDataError(ValueError):
    pass


class SweepError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass
