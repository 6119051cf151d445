"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Raised for invalid parameter values or malformed configuration input."""
