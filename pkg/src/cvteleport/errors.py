"""Exception and warning types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class ConvergenceError(RuntimeError):
    """A series or quadrature failed its convergence check."""


class GridCoverageError(RuntimeError):
    """An outcome grid captures too little of the probability mass."""


class TruncationWarning(UserWarning):
    """A result is limited by the photon-number cutoff."""
