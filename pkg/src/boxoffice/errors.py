"""Exception types shared across the package."""


class BoxOfficeError(Exception):
    """Base class for all package-specific errors."""


class StreamCorruptionError(BoxOfficeError):
    """The input stream is corrupt at the document level (not a bad record)."""

    def __init__(self, message, byte_offset):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class MissingYearError(BoxOfficeError):
    """A CPI lookup hit a year the table does not cover."""


class UnknownRatingError(BoxOfficeError):
    """A content-rating label outside the known vocabulary."""


class UndefinedCorrelationError(BoxOfficeError):
    """A rank correlation is undefined (zero rank variance)."""


class EmptyClassError(BoxOfficeError):
    """A revenue class has no members, so balancing cannot proceed."""
