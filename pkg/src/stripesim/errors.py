"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A simulation configuration field (or combination) is invalid."""


class UsageError(ValueError):
    """An API entry point was called in an unsupported way."""


class NumericError(ArithmeticError):
    """A numerical precondition failed (non-PSD input, singular system, ...)."""
