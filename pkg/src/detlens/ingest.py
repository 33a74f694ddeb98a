"""Parsing and validation of the line-delimited input files.

Four file kinds feed the toolkit: detections (JSONL), class vocabulary
(plain text, one label per line), captions (JSONL) and ground-truth
annotations (JSONL). Parsing is strict by default: the first structural
problem raises with its line number. Lenient parsing skips bad lines and
keeps the diagnostics instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import (
    ConfidenceOutOfRange,
    DuplicateLabel,
    EmptyVocabulary,
    IngestError,
    InvalidBBox,
    MalformedRecord,
    UnknownClass,
)

GT_SOURCE_PROVIDED = "provided"
GT_SOURCE_USER_ADDED = "user_added"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in absolute pixel coordinates, corners (x1,y1)-(x2,y2)."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for name in ("x1", "y1", "x2", "y2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if min(self.x1, self.y1, self.x2, self.y2) < 0:
            raise InvalidBBox(f"negative coordinate in {self.as_list()}")
        if self.x2 <= self.x1 or self.y2 <= self.y1:
            raise InvalidBBox(f"box {self.as_list()} has non-positive width or height")

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]


@dataclass(frozen=True)
class Detection:
    detection_id: str
    image_id: str
    class_label: str
    bbox: BBox
    confidence: float


@dataclass(frozen=True)
class CaptionDoc:
    person_id: str
    text: str


@dataclass(frozen=True)
class GroundTruthAnnotation:
    image_id: str
    class_label: str
    bbox: BBox
    source: str = GT_SOURCE_PROVIDED


class ClassVocabulary:
    """Ordered set of class labels; the order fixes count-vector axes."""

    def __init__(self, labels: Iterable[str]):
        self._labels = tuple(labels)
        self._index = {label: i for i, label in enumerate(self._labels)}
        if not self._labels:
            raise EmptyVocabulary("vocabulary has no labels")
        if len(self._index) != len(self._labels):
            raise DuplicateLabel("duplicate label in vocabulary")

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    def index(self, label: str) -> int:
        return self._index[label]

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, ClassVocabulary) and self._labels == other._labels

    def __hash__(self) -> int:
        return hash(self._labels)


class DetectionSet:
    """Immutable, order-preserving collection of detections with id lookup."""

    def __init__(self, detections: Iterable[Detection], vocabulary: ClassVocabulary,
                 diagnostics: Iterable[IngestError] = ()):
        self._detections = tuple(detections)
        self._vocabulary = vocabulary
        self._diagnostics = tuple(diagnostics)
        self._by_id: dict[str, Detection] = {}
        for det in self._detections:
            if det.detection_id in self._by_id:
                raise MalformedRecord(f"duplicate detection id {det.detection_id!r}")
            self._by_id[det.detection_id] = det

    @property
    def vocabulary(self) -> ClassVocabulary:
        return self._vocabulary

    @property
    def diagnostics(self) -> tuple[IngestError, ...]:
        return self._diagnostics

    def __len__(self) -> int:
        return len(self._detections)

    def __iter__(self) -> Iterator[Detection]:
        return iter(self._detections)

    def __eq__(self, other) -> bool:
        return (isinstance(other, DetectionSet)
                and self._detections == other._detections
                and self._vocabulary == other._vocabulary)

    def get(self, detection_id: str) -> Detection | None:
        return self._by_id.get(detection_id)

    def __contains__(self, detection_id: str) -> bool:
        return detection_id in self._by_id

    def image_ids(self) -> tuple[str, ...]:
        seen = dict.fromkeys(det.image_id for det in self._detections)
        return tuple(seen)

    def for_image(self, image_id: str) -> tuple[Detection, ...]:
        return tuple(d for d in self._detections if d.image_id == image_id)

    def for_class(self, class_label: str) -> tuple[Detection, ...]:
        return tuple(d for d in self._detections if d.class_label == class_label)

    def classes_present(self) -> tuple[str, ...]:
        present = {d.class_label for d in self._detections}
        return tuple(label for label in self._vocabulary if label in present)


def _json_record(line: str, line_no: int) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"invalid JSON ({exc.msg})", line_no) from exc
    if not isinstance(record, dict):
        raise MalformedRecord("record is not a JSON object", line_no)
    return record


def _required_str(record: dict, key: str, line_no: int) -> str:
    value = record.get(key)
    if not isinstance(value, str) or not value:
        raise MalformedRecord(f"missing or empty {key!r}", line_no)
    return value


def _parse_bbox(record: dict, line_no: int) -> BBox:
    raw = record.get("bbox")
    if (not isinstance(raw, (list, tuple)) or len(raw) != 4
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)):
        raise MalformedRecord("bbox must be an array of 4 numbers", line_no)
    try:
        return BBox(*(float(v) for v in raw))
    except InvalidBBox as exc:
        raise InvalidBBox(str(exc), line_no) from exc


def _iter_lines(stream: Iterable[str]) -> Iterator[tuple[int, str]]:
    for line_no, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if line.strip():
            yield line_no, line


def parse_vocabulary(stream: Iterable[str]) -> ClassVocabulary:
    """One label per line; rejects duplicates, keeps first-appearance order."""
    labels: list[str] = []
    seen: set[str] = set()
    for line_no, line in _iter_lines(stream):
        label = line.strip()
        if label in seen:
            raise DuplicateLabel(f"label {label!r} already defined", line_no)
        seen.add(label)
        labels.append(label)
    if not labels:
        raise EmptyVocabulary("vocabulary stream is empty")
    return ClassVocabulary(labels)


def _detection_from_record(record: dict, line_no: int, vocabulary: ClassVocabulary) -> Detection:
    image_id = _required_str(record, "image_id", line_no)
    class_label = _required_str(record, "class", line_no)
    if class_label not in vocabulary:
        raise UnknownClass(f"class {class_label!r} not in vocabulary", line_no)
    bbox = _parse_bbox(record, line_no)
    confidence = record.get("confidence")
    if not isinstance(confidence, (int, float)) or isinstance(confidence, bool):
        raise MalformedRecord("missing or non-numeric 'confidence'", line_no)
    if not 0.0 <= confidence <= 1.0:
        raise ConfidenceOutOfRange(f"confidence {confidence} outside [0, 1]", line_no)
    detection_id = record.get("id")
    if detection_id is None:
        detection_id = f"{image_id}#{line_no}"
    elif not isinstance(detection_id, str) or not detection_id:
        raise MalformedRecord("'id' must be a non-empty string", line_no)
    return Detection(detection_id, image_id, class_label, bbox, float(confidence))


def parse_detections(stream: Iterable[str], vocabulary: ClassVocabulary,
                     lenient: bool = False) -> DetectionSet:
    """Parse a detections JSONL stream against the vocabulary.

    Strict mode raises on the first bad line; lenient mode skips bad lines
    and records one diagnostic per skipped line on the returned set.
    Detections without an explicit id get ``<image_id>#<line_no>``.
    """
    detections: list[Detection] = []
    diagnostics: list[IngestError] = []
    ids_seen: set[str] = set()
    for line_no, line in _iter_lines(stream):
        try:
            det = _detection_from_record(_json_record(line, line_no), line_no, vocabulary)
            if det.detection_id in ids_seen:
                raise MalformedRecord(f"duplicate detection id {det.detection_id!r}", line_no)
        except IngestError as exc:
            if not lenient:
                raise
            diagnostics.append(exc)
            continue
        ids_seen.add(det.detection_id)
        detections.append(det)
    return DetectionSet(detections, vocabulary, diagnostics)


def parse_captions(stream: Iterable[str]) -> list[CaptionDoc]:
    """Parse a captions JSONL stream; several captions per person are fine."""
    captions: list[CaptionDoc] = []
    for line_no, line in _iter_lines(stream):
        record = _json_record(line, line_no)
        person_id = _required_str(record, "person_id", line_no)
        text = record.get("text")
        if not isinstance(text, str):
            raise MalformedRecord("missing or non-string 'text'", line_no)
        captions.append(CaptionDoc(person_id, text))
    return captions


def parse_ground_truth(stream: Iterable[str], vocabulary: ClassVocabulary,
                       lenient: bool = False) -> list[GroundTruthAnnotation]:
    """Parse a ground-truth JSONL stream; every record gets source=provided."""
    annotations: list[GroundTruthAnnotation] = []
    for line_no, line in _iter_lines(stream):
        try:
            record = _json_record(line, line_no)
            image_id = _required_str(record, "image_id", line_no)
            class_label = _required_str(record, "class", line_no)
            if class_label not in vocabulary:
                raise UnknownClass(f"class {class_label!r} not in vocabulary", line_no)
            bbox = _parse_bbox(record, line_no)
        except IngestError:
            if not lenient:
                raise
            continue
        annotations.append(GroundTruthAnnotation(image_id, class_label, bbox))
    return annotations


def parse_person_images(stream: Iterable[str]) -> dict[str, frozenset[str]]:
    """Parse the optional person->image mapping (JSONL: person_id, image_id)."""
    mapping: dict[str, set[str]] = {}
    for line_no, line in _iter_lines(stream):
        record = _json_record(line, line_no)
        person_id = _required_str(record, "person_id", line_no)
        image_id = _required_str(record, "image_id", line_no)
        mapping.setdefault(person_id, set()).add(image_id)
    return {person: frozenset(images) for person, images in mapping.items()}


def detection_record(det: Detection) -> dict:
    return {
        "id": det.detection_id,
        "image_id": det.image_id,
        "class": det.class_label,
        "bbox": det.bbox.as_list(),
        "confidence": det.confidence,
    }


def annotation_record(ann: GroundTruthAnnotation) -> dict:
    return {"image_id": ann.image_id, "class": ann.class_label, "bbox": ann.bbox.as_list()}


def serialize_detections(detections: Iterable[Detection]) -> str:
    """JSONL text in the detections input format; inverse of parse_detections."""
    return "".join(json.dumps(detection_record(d)) + "\n" for d in detections)


def serialize_ground_truth(annotations: Iterable[GroundTruthAnnotation]) -> str:
    """JSONL text in the ground-truth input format; inverse of parse_ground_truth."""
    return "".join(json.dumps(annotation_record(a)) + "\n" for a in annotations)


def iou(a: BBox, b: BBox) -> float:
    """Intersection-over-union of two boxes; 0 when they do not overlap."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)
