"""Exception types raised across the package."""


class HypsymError(Exception):
    """Base class for all package errors."""


class DomainError(HypsymError, ValueError):
    """Input outside the domain where an operation is defined."""


class RangeError(HypsymError, IndexError):
    """Block or level index outside the usable range of a grid."""


class ResolutionError(HypsymError, ValueError):
    """The grid is too coarse for the requested scale or step size."""


class NotHyperbolicError(HypsymError):
    """Complex eigenvalues or a non semi-simple (Jordan) eigenvalue."""


class MultiplicityError(HypsymError):
    """The eigenvalue multiplicity pattern changes in time, or blocks nearly touch."""


class IllConditionedError(HypsymError):
    """Eigenvector matrix too close to singular."""


class EpsilonTooLargeError(HypsymError):
    """Mollified eigenvector matrix lost invertibility."""


class ConvergenceError(HypsymError):
    """An iteration failed to contract."""


class BelowR0Error(HypsymError):
    """Symmetrizer is not positive definite at the requested frequency."""


class FitError(HypsymError):
    """Not enough data for a least-squares fit."""


class ConfigError(HypsymError, ValueError):
    """Invalid experiment configuration."""
