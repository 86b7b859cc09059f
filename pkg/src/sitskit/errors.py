"""Exception types shared across the toolkit."""


class SitsKitError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SitsKitError, ValueError):
    """An argument has an invalid value or an inconsistent shape."""


class ConfigurationError(SitsKitError):
    """A required setting is missing or unusable (band maps, run config)."""


class FormatError(SitsKitError):
    """A file is not a valid STSR container."""


class CorruptionError(SitsKitError):
    """An STSR header parsed but the payload does not match it."""


class MetricUndefinedError(SitsKitError):
    """A metric was requested from an accumulator with no evaluated pixels."""


class TrainingError(SitsKitError):
    """Training produced a non-finite loss and cannot continue."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch
