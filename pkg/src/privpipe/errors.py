"""Exception hierarchy shared across the package."""


class PrivpipeError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(PrivpipeError):
    """Input data violates a documented invariant (bad label, duplicate id, ...)."""


class ConfigError(PrivpipeError):
    """Configuration is unusable: unknown option value or missing resource file."""


class IntegrityError(PrivpipeError):
    """An audit log does not match the corpus it claims to describe."""
