"""Exception types shared across the solver modules."""


class NonFiniteFieldError(RuntimeError):
    """A field picked up NaN/Inf entries outside of a detected blowup."""


class NoConvergenceError(RuntimeError):
    """An iterative solve exhausted max_iter.  Carries the best iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateCollapseError(RuntimeError):
    """Fixed-point iteration collapsed to the zero solution."""


class NoNegativeEigenvalueError(RuntimeError):
    """The lowest eigenvalue is nonnegative; the criterion does not fire."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class BracketInvalidError(ValueError):
    """Bisection endpoints do not bracket the scattering threshold."""
