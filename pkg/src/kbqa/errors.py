"""Common exception base so callers can catch any library error at once."""


class KbqaError(Exception):
    """Base class for every error raised by this package."""
