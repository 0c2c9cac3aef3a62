"""Exception types shared across the package."""


class ConvqaError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ConvqaError):
    """Invalid or inconsistent run configuration."""


class DataError(ConvqaError):
    """Malformed or inconsistent input data (files, records, ids)."""


class TransportError(ConvqaError):
    """A model endpoint could not be reached or answered incorrectly
    after all retries were exhausted."""
