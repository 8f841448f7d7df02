"""Exception types shared across the package."""


class ConvsysError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ConvsysError):
    """Invalid configuration, grid, or argument combination."""


class NumericalError(ConvsysError):
    """A computation produced results outside its validity contract."""
