"""Error types and input validation for billboard-salience.

Every failure the toolkit reports is a SalienceError subclass. The class
attribute ``exit_code`` tells the CLI how to exit: 1 for usage errors, 2 for
data errors. Located errors (parsers, codecs) carry the path and row, field
or byte offset that failed.
"""

import os
from typing import Optional, Sequence


# Maximum size of any binary input (images, maps): 256 MB
MAX_INPUT_SIZE = 256 * 1024 * 1024


class SalienceError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2


class UsageError(SalienceError, ValueError):
    """Raised for invalid run configuration or command-line usage."""

    exit_code = 1


class InputTooLargeError(SalienceError, ValueError):
    """Raised when an input file exceeds the maximum allowed size.

    Attributes:
        path: Path to the oversized file
        size_bytes: Actual size of the file in bytes
        max_bytes: Maximum allowed size in bytes
    """

    def __init__(self, path: str, size_bytes: int, max_bytes: int):
        self.path = path
        self.size_bytes = size_bytes
        self.max_bytes = max_bytes
        super().__init__(
            f"Input {path} ({format_size(size_bytes)}) exceeds "
            f"maximum size limit of {format_size(max_bytes)}"
        )


# --- geometry and images -------------------------------------------------

class EmptyIntersection(SalienceError, ValueError):
    """Raised when a box lies entirely outside the image frame."""


class UnsupportedChannelCount(SalienceError, ValueError):
    """Raised for images that are neither luma (1) nor RGB (3)."""


class ImageTooSmall(SalienceError, ValueError):
    """Raised when an image is smaller than the saliency mean filter."""


class DimensionError(SalienceError, ValueError):
    """Raised for zero-sized or otherwise invalid target dimensions."""


class DimensionMismatch(SalienceError, ValueError):
    """Raised when a saliency map and a fixation map (or image) disagree in size."""


# --- fixations ------------------------------------------------------------

class OutOfFrame(SalienceError, ValueError):
    """Raised when fixation points fall outside the bound image.

    Attributes:
        points: (index, x, y) of every offending point
    """

    def __init__(self, points: Sequence[tuple], width: int, height: int):
        self.points = list(points)
        self.width = width
        self.height = height
        shown = ", ".join(f"#{i} ({x:g}, {y:g})" for i, x, y in self.points[:5])
        more = f" and {len(self.points) - 5} more" if len(self.points) > 5 else ""
        super().__init__(
            f"{len(self.points)} fixation(s) outside {width}x{height} frame: {shown}{more}"
        )


class NonMonotonicTimestamps(SalienceError, ValueError):
    """Raised when gaze timestamps are not strictly increasing.

    Attributes:
        index: Index of the first sample whose timestamp does not increase
    """

    def __init__(self, index: int, message: Optional[str] = None):
        self.index = index
        super().__init__(message or f"timestamp at sample {index} is not strictly increasing")


# --- metrics and significance ---------------------------------------------

class EmptyGroundTruth(SalienceError, ValueError):
    """Raised when average precision is requested without ground-truth boxes."""


class NoFixations(SalienceError, ValueError):
    """Raised when a fixation-based metric gets a map with no fixated cell."""


class ZeroVariance(SalienceError, ValueError):
    """Raised when NSS is requested for a constant saliency map."""


class EmptyTrainingSet(SalienceError, ValueError):
    """Raised when threshold calibration has no regions to average."""


class MissingLabels(SalienceError, ValueError):
    """Raised when confusion statistics meet a region without prediction or truth."""


# --- ingestion ------------------------------------------------------------

class FormatError(SalienceError, ValueError):
    """Raised for malformed binary input.

    Attributes:
        offset: Byte offset where decoding failed, if known
    """

    def __init__(self, message: str, offset: Optional[int] = None, path: Optional[str] = None):
        self.reason = message
        self.offset = offset
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}: "
        if offset is not None:
            where += f"byte {offset}: "
        super().__init__(f"{where}{message}")


class UnsupportedMagic(FormatError):
    """Raised when a binary file starts with an unknown magic number."""


class ParseError(SalienceError, ValueError):
    """Raised for malformed text input.

    Attributes:
        path: File being parsed
        line: 1-based line (or row) number
        field: Name of the offending field, if known
    """

    def __init__(self, path: str, line: int, message: str, field: Optional[str] = None):
        self.path = path
        self.line = line
        self.field = field
        where = f"{path}:{line}"
        if field is not None:
            where += f" [{field}]"
        super().__init__(f"{where}: {message}")


class InvalidBox(ParseError):
    """Raised for annotation rows describing a zero-area or negative box."""


class ConfidenceOutOfRange(ParseError):
    """Raised for detection rows whose confidence is outside [0, 1]."""


class MissingFile(SalienceError):
    """Raised when a manifest references a file that does not exist."""

    def __init__(self, path: str, referenced_from: Optional[str] = None):
        self.path = path
        self.referenced_from = referenced_from
        suffix = f" (referenced from {referenced_from})" if referenced_from else ""
        super().__init__(f"File not found: {path}{suffix}")


class DuplicateImageId(ParseError):
    """Raised when two manifest records share an image_id."""


def format_size(bytes_count: int) -> str:
    """Format byte count as human-readable size string.

    Args:
        bytes_count: Number of bytes

    Returns:
        Human-readable size string (e.g., "5.2 MB", "1.5 KB")
    """
    if bytes_count < 1024:
        return f"{bytes_count} B"
    elif bytes_count < 1024 * 1024:
        return f"{bytes_count / 1024:.1f} KB"
    elif bytes_count < 1024 * 1024 * 1024:
        return f"{bytes_count / (1024 * 1024):.1f} MB"
    else:
        return f"{bytes_count / (1024 * 1024 * 1024):.1f} GB"


def validate_input_size(path: str) -> None:
    """Validate that an input file does not exceed the maximum size limit.

    Args:
        path: Path to the input file

    Raises:
        InputTooLargeError: If the file exceeds MAX_INPUT_SIZE
        OSError: If the file cannot be accessed
    """
    size = os.path.getsize(path)
    if size > MAX_INPUT_SIZE:
        raise InputTooLargeError(path, size, MAX_INPUT_SIZE)


def read_text_file(path: str) -> str:
    """Read a UTF-8 text input.

    Raises:
        ParseError: At the line holding the first invalid byte
        OSError: If the file cannot be read
    """
    with open(path, "rb") as handle:
        data = handle.read()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        line = data.count(b"\n", 0, e.start) + 1
        raise ParseError(path, line, f"invalid UTF-8 at byte {e.start}") from None


def describe_error(error: BaseException) -> str:
    """Render an exception as ``ErrorName: message`` for logs and reports."""
    return f"{type(error).__name__}: {error}"
