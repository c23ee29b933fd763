"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A network, environment, or config file is internally inconsistent."""


class UsageError(RuntimeError):
    """An API was called out of protocol (e.g. stepping a finished episode)."""


class WeightFormatError(ConfigurationError):
    """A weight file is malformed or does not match the expected architecture."""
