"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so new failure kinds should subclass one
of the three roots below rather than ``Exception`` directly.
"""


class KoopmanError(Exception):
    """Base class for all library errors."""


class ConfigError(KoopmanError, ValueError):
    """Invalid configuration, bad arguments, or misuse of an API."""


class DimensionError(ConfigError):
    """Array shapes that do not agree with each other or with a model."""


class InsufficientDataError(ConfigError):
    """Too few samples or trajectory points for the requested operation."""


class MisconfigurationError(ConfigError):
    """A model lacks a component the operation needs (e.g. an output map)."""


class SchemaError(ConfigError):
    """A file whose header or structure is not one this package writes."""


class NumericalFailure(KoopmanError, ArithmeticError):
    """A decomposition or solve failed to produce finite results."""


class InstabilityError(NumericalFailure):
    """A time-stepper produced non-finite values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
