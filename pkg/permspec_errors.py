"""
Exception types raised by permspec.
"""


class PermspecError(Exception):
    """Base class for all permspec failures."""


class PrecisionExhausted(PermspecError):
    """A certified interval is too wide to decide a comparison; raise the precision."""

    def __init__(self, message, bits=None):
        super().__init__(message)
        self.bits = bits


class TruncationTooSmall(PermspecError):
    """The reported truncation bias bound exceeds the caller's tolerance."""

    def __init__(self, message, bound=None, tolerance=None):
        super().__init__(message)
        self.bound = bound
        self.tolerance = tolerance


class DomainError(PermspecError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class ResourceLimitExceeded(PermspecError):
    """A configured size guard would be exceeded."""
