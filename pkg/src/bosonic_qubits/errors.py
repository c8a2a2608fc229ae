"""Exception hierarchy shared by every module of the package."""


class BosonicQubitsError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(BosonicQubitsError, ValueError):
    """A scalar parameter is outside its allowed range."""


class InvalidDimensionError(InvalidParameterError):
    """A dimension (matrix order, list length) is invalid or inconsistent."""


class InvalidSelectionError(InvalidParameterError):
    """Port selection contains duplicates or out-of-range ports."""


class SizeLimitError(BosonicQubitsError, ValueError):
    """A cost guard (permanent order, enumeration size, 2^N expansion) was exceeded."""


class OutcomeSpaceOverflowError(SizeLimitError):
    """The joint outcome space is too large to enumerate exactly."""


class ConfigError(BosonicQubitsError, ValueError):
    """A run configuration failed validation."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class NumericalError(BosonicQubitsError, ArithmeticError):
    """A computation produced a non-finite or otherwise unusable value."""
