"""Exception types shared across the engine."""


class ConvRecError(Exception):
    """Base class for all engine errors."""


class InvalidUtterance(ConvRecError):
    """Raised for empty or otherwise unusable utterance text."""


class StateDesync(ConvRecError):
    """Raised when an utterance's turn index disagrees with the history."""


class InvalidConfig(ConvRecError):
    """Raised for bad configuration values or dimension mismatches."""


class InvalidContext(ConvRecError):
    """Raised for out-of-range context inputs (e.g. mood outside [-1, 1])."""


class NumericError(ConvRecError):
    """Raised when a computation produces non-finite values."""


class NotFound(ConvRecError):
    """Raised for lookups of unknown sessions or catalogs."""
