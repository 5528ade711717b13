"""Exception taxonomy shared across the package."""


class SievekitError(Exception):
    """Base class for all sievekit errors."""


class DomainError(SievekitError):
    """An argument lies outside the domain of a table or function."""


class ConfigurationError(SievekitError):
    """Invalid grid/step/delay configuration."""


class ParameterError(SievekitError):
    """Invalid user-supplied parameters (k, u, v, ranges)."""


class EvaluationError(SievekitError):
    """A bound cannot be evaluated at the requested point (e.g. below the
    sifting limit, where the lower sieve function vanishes)."""


class CalibrationError(SievekitError):
    """The two-parameter shooting failed to converge.

    Carries the final residuals so callers can diagnose.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class AdmissibilityError(SievekitError):
    """An operation requiring an admissible tuple received an inadmissible one."""


class ResourceError(SievekitError):
    """A request exceeds the supported desk-scale limits."""


class NumericOverflowError(SievekitError):
    """A solver produced a non-finite value."""


class TableFormatError(SievekitError):
    """A table/cache file is malformed or has an unsupported version."""
