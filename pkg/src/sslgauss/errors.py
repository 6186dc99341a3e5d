"""Exception types shared across the package."""


class SslgaussError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSupportError(SslgaussError):
    """Support set has duplicate, out-of-range, or wrongly sized indices."""


class EmptyDatasetError(SslgaussError):
    """A dataset with zero labeled and zero unlabeled samples was requested."""


class InsufficientSamplesError(SslgaussError):
    """An operation needs more samples than were provided (e.g. covariance with n < 2)."""


class MissingClassError(SslgaussError):
    """A labeled-data operation needs both classes but one is absent."""


class ScreeningTooSmallError(SslgaussError):
    """The screening step would retain fewer coordinates than the target sparsity."""


class ConvergenceError(SslgaussError):
    """An iterative solver did not reach its tolerance within the iteration cap.

    Carries the last iterate so callers can degrade gracefully.
    """

    def __init__(self, message, last_iterate=None, residual=None, rayleigh=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
        self.rayleigh = rayleigh


class ContractError(SslgaussError):
    """An input violates a documented contract (non-unit direction, size mismatch...)."""


class ExactInfeasibleError(SslgaussError):
    """Exact combinatorial evaluation is out of range; use the bound or MC paths."""


class BoundInapplicableError(SslgaussError):
    """The closed-form bound's exponent condition fails for these parameters."""


class ConfigError(SslgaussError):
    """A config file or flag set is malformed or inconsistent."""
