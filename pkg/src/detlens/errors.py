"""Shared exception hierarchy.

Every error carries a machine-readable ``code`` and a ``category`` the HTTP
layer maps onto status codes (validation -> 400, missing -> 404,
conflict -> 409, corrupt -> 500).
"""

from __future__ import annotations


class DetlensError(Exception):
    code = "error"
    category = "validation"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details

    @property
    def message(self) -> str:
        return str(self)


class IngestError(DetlensError):
    """Input-file diagnostic, tied to a 1-based line number when known."""

    def __init__(self, message: str, line_no: int | None = None, **details):
        if line_no is not None:
            message = f"line {line_no}: {message}"
            details["line_no"] = line_no
        super().__init__(message, **details)
        self.line_no = line_no


class MalformedRecord(IngestError):
    code = "malformed_record"


class InvalidBBox(IngestError):
    code = "invalid_bbox"


class UnknownClass(IngestError):
    code = "unknown_class"


class ConfidenceOutOfRange(IngestError):
    code = "confidence_out_of_range"


class DuplicateLabel(IngestError):
    code = "duplicate_label"


class EmptyVocabulary(IngestError):
    code = "empty_vocabulary"


class InvalidLemmaTable(IngestError):
    code = "invalid_lemma_table"


class NoSuchClass(DetlensError):
    code = "no_such_class"
    category = "missing"


class MixedImages(DetlensError):
    code = "mixed_images"


class DegenerateExtent(DetlensError):
    code = "degenerate_extent"


class InsufficientClasses(DetlensError):
    code = "insufficient_classes"


class InsufficientImages(DetlensError):
    code = "insufficient_images"


class TooFewPoints(DetlensError):
    code = "too_few_points"


class EmptyDataset(DetlensError):
    code = "empty_dataset"


class UnknownDataset(DetlensError):
    code = "unknown_dataset"
    category = "missing"


class UnknownSession(DetlensError):
    code = "unknown_session"
    category = "missing"


class UnknownDetection(DetlensError):
    code = "unknown_detection"
    category = "missing"


class UnknownImage(DetlensError):
    code = "unknown_image"
    category = "missing"


class AlreadyEliminated(DetlensError):
    code = "already_eliminated"
    category = "conflict"


class InvalidEvent(DetlensError):
    code = "invalid_event"


class CorruptLog(DetlensError):
    code = "corrupt_log"
    category = "corrupt"

    def __init__(self, message: str, index: int | None = None, **details):
        if index is not None:
            details["index"] = index
        super().__init__(message, **details)
        self.index = index


class LengthMismatch(DetlensError):
    code = "length_mismatch"


class TooFewProfiles(DetlensError):
    code = "too_few_profiles"
