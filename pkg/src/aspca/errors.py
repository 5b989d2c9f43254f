"""Exception types raised across the package."""


class AspcaError(Exception):
    """Base class for all package errors."""


class InvalidInputError(AspcaError, ValueError):
    """Input violates a documented precondition (shape, finiteness, range)."""


class ConvergenceError(AspcaError, ArithmeticError):
    """The Jacobi eigensolver did not converge within its sweep budget."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class NotPositiveDefiniteError(AspcaError, ArithmeticError):
    """Cholesky hit a non-positive pivot."""

    def __init__(self, index, pivot):
        super().__init__(
            f"matrix is not positive definite: pivot {index} is {pivot!r}"
        )
        self.index = index
        self.pivot = pivot


class AbsentComponentError(AspcaError, LookupError):
    """A PC direction was requested for a component with zero eigenvalue."""


class InvalidComponentError(AspcaError, ArithmeticError):
    """A noise-reduced eigenvalue is not positive, so the NR direction is undefined."""

    def __init__(self, component, lambda_tilde):
        super().__init__(
            f"component {component} is invalid: noise-reduced eigenvalue "
            f"lambda_tilde={lambda_tilde!r} is not positive beyond round-off"
        )
        self.component = component
        self.lambda_tilde = lambda_tilde
