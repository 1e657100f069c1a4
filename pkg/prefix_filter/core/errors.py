# /prefix_filter/core/errors.py
"""
Prefix filter exception hierarchy.
"""


class PrefixFilterError(Exception):
    """Base class for every error raised by the prefix filter package."""


class SpareOverflowError(PrefixFilterError, OverflowError):
    """The spare refused an insertion: the prefix filter has failed."""


class CapacityExceededError(PrefixFilterError, OverflowError):
    """More keys were inserted than the filter was sized for (n)."""


class SerializationError(PrefixFilterError, ValueError):
    """A serialized filter or spare could not be decoded."""

    BAD_MAGIC = "BAD_MAGIC"
    BAD_VERSION = "BAD_VERSION"
    TRUNCATED = "TRUNCATED"
    BAD_CHECKSUM = "BAD_CHECKSUM"
    BAD_SPARE_KIND = "BAD_SPARE_KIND"
    BAD_HEADER = "BAD_HEADER"

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class WorkloadError(PrefixFilterError, ValueError):
    """A bench workload was requested with invalid parameters."""
