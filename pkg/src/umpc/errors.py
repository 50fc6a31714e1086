"""Exception hierarchy shared across the package.

Every error raised by the library derives from :class:`UmpcError` so callers
(and the CLI) can map failures to exit codes without matching on message text.
"""


class UmpcError(Exception):
    """Base class for all package errors."""


class UsageError(UmpcError):
    """An API was called with inconsistent or unsupported arguments."""


class ConfigError(UmpcError):
    """A configuration file or run configuration is invalid."""


class ParseError(UmpcError):
    """Input data could not be parsed."""


class DomainError(UmpcError):
    """A value lies outside the domain a kernel or protocol expects."""


class RangeError(UmpcError):
    """A quantity exceeds the representable fixed-point magnitude."""


class ScaleError(UmpcError):
    """A computation exceeds the built-in desk-scale guards."""


class SamplingError(UmpcError):
    """Edge sampling failed after exhausting its restart budget.

    Retryable: a fresh rng (or a larger budget) may succeed.
    """

    retryable = True
