"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems (bad parameters,
unparseable configs) exit with 2, runtime numerical failures (singular
matrices encountered mid-computation) exit with 3.
"""


class CovmeansError(Exception):
    """Base class for all package errors."""


class ValidationError(CovmeansError):
    """A precondition on user-supplied parameters was violated."""


class ConfigError(ValidationError):
    """A config file could not be parsed; message carries line/field context."""


class SupportViolationError(ValidationError):
    """A matrix argument lies outside the distribution's support."""


class NonInvertibleSplitError(ValidationError):
    """A split produces blocks with fewer samples than dimensions."""


class SingularMatrixError(CovmeansError):
    """A matrix required to be positive definite is numerically singular."""
