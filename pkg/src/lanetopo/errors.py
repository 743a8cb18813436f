"""Exception types shared across the package."""


class LaneTopoError(Exception):
    """Base class for all lanetopo errors."""


class InvalidPolyline(LaneTopoError):
    """Polyline input violates a structural requirement (too few points, non-finite)."""


class InvalidSampleCount(LaneTopoError):
    """Requested sample count is too small."""


class InsufficientSamples(LaneTopoError):
    """Not enough samples to fit even a degenerate polynomial."""


class EmptyRasterization(LaneTopoError):
    """Polyline leaves no trace inside the grid ROI."""


class DecodeFailed(LaneTopoError):
    """Mask decoding produced too few valid lines; the instance is dropped.

    Carries the instance confidence so callers can report what was dropped.
    """

    def __init__(self, message, confidence=None):
        super().__init__(message)
        self.confidence = confidence


class InvalidMatrix(LaneTopoError):
    """Score matrix contains non-finite or negative entries."""


class InvalidDim(LaneTopoError):
    """Positional encoding dimension must be even and >= 2."""


class InvalidScore(LaneTopoError):
    """Score outside the [0, 1] range."""


class ParseError(LaneTopoError):
    """Malformed JSON input; carries the 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(LaneTopoError):
    """Schema violation; carries the JSON path of the offending element."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message
