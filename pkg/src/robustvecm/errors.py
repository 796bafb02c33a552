"""Exception types raised by the robustvecm package."""


class RobustVecmError(Exception):
    """Base class for all package errors."""


class DataError(RobustVecmError):
    """Malformed or non-finite input data."""


class DimensionError(RobustVecmError):
    """Input shapes are inconsistent with the declared model dimensions."""


class RankViolationError(RobustVecmError):
    """A matrix exceeds its declared rank budget.

    Carries the offending singular values in ``singular_values``.
    """

    def __init__(self, message, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class GenerationError(RobustVecmError):
    """Ground-truth generation exhausted its stability retry budget."""

    def __init__(self, message, attempts=None):
        super().__init__(message)
        self.attempts = attempts


class SimulationOverflowError(RobustVecmError):
    """The simulated state left the representable range (explosive draw)."""


class CollinearRegressorsError(RobustVecmError):
    """The stacked-regressor Gram matrix is singular."""


class NumericalError(RobustVecmError):
    """A numerical kernel failed (Cholesky, SVD, or a broken descent trace)."""
