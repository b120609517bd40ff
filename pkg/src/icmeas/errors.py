"""Exception types shared across the package."""


class IcmeasError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(IcmeasError, ValueError):
    """A configuration value is invalid or inconsistent."""


class PreconditionError(IcmeasError, ValueError):
    """Input data violates a documented precondition (e.g. unsorted trace)."""


class InsufficientDataError(IcmeasError, RuntimeError):
    """Not enough data to compute the requested quantity."""
