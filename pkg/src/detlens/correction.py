"""Event-sourced correction sessions.

A session is an append-only log of user actions over an immutable dataset:
false-positive eliminations, bounding-box re-annotations, false-negative
additions, and reverts of earlier events. All derived state (which
detections are active, which box is current, the effective ground truth)
is a deterministic fold of the log, so replaying a persisted log always
reproduces the same session.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Iterable, Sequence

from .errors import (
    AlreadyEliminated,
    CorruptLog,
    DetlensError,
    EmptyDataset,
    InvalidBBox,
    InvalidEvent,
    NoSuchClass,
    UnknownClass,
    UnknownDetection,
    UnknownImage,
)
from .ingest import (
    GT_SOURCE_USER_ADDED,
    BBox,
    Detection,
    DetectionSet,
    GroundTruthAnnotation,
    iou,
    serialize_ground_truth,
)

KIND_ELIMINATE = "eliminate_fp"
KIND_REANNOTATE = "reannotate_bbox"
KIND_ADD_FN = "add_false_negative"
KIND_REVERT = "revert"
EVENT_KINDS = (KIND_ELIMINATE, KIND_REANNOTATE, KIND_ADD_FN, KIND_REVERT)

IOU_MATCH_THRESHOLD = 0.5


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class CorrectionEvent:
    index: int
    kind: str
    payload: dict
    actor: str
    at: str


@dataclass(frozen=True)
class ProjectionSnapshot:
    """Per-class confidence stats after one event; after_event=-1 is the baseline."""

    class_label: str
    after_event: int
    n_remaining: int
    mean_confidence: float | None
    variance_confidence: float | None
    empty: bool


@dataclass(frozen=True)
class ClassProportion:
    class_label: str
    image_count: int
    proportion: float


@dataclass(frozen=True)
class GtEntry:
    gt_index: int
    class_label: str
    bbox: BBox
    source: str


@dataclass(frozen=True)
class MatchedPair:
    class_label: str
    gt_index: int
    detection_id: str
    iou: float


@dataclass(frozen=True)
class MappingReport:
    image_id: str
    ground_truth: tuple[GtEntry, ...]
    matches: tuple[MatchedPair, ...]
    unmatched_gt: tuple[int, ...]
    unmatched_predictions: tuple[str, ...]


def class_proportions(detections: DetectionSet) -> list[ClassProportion]:
    """Share of images containing each class, most affected classes first.

    Guides the reviewer toward classes worth triaging. Ties break on the
    label so the ranking is stable.
    """
    if len(detections) == 0:
        raise EmptyDataset("dataset has no detections")
    images_by_class: dict[str, set[str]] = {}
    for det in detections:
        images_by_class.setdefault(det.class_label, set()).add(det.image_id)
    total = len(detections.image_ids())
    ranked = [
        ClassProportion(label, len(images), len(images) / total)
        for label, images in images_by_class.items()
    ]
    ranked.sort(key=lambda p: (-p.proportion, p.class_label))
    return ranked


def _bbox_from_payload(raw, *, context: str) -> BBox:
    if (not isinstance(raw, (list, tuple)) or len(raw) != 4
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)):
        raise InvalidBBox(f"{context}: bbox must be an array of 4 numbers")
    return BBox(*(float(v) for v in raw))


class Session:
    """One correction session: an immutable dataset plus an event log.

    Appends are serialized by an internal lock and validated atomically:
    a rejected event leaves the log untouched. Queries derive everything
    from the log, never from wall-clock time.
    """

    def __init__(self, detections: DetectionSet,
                 ground_truth: Sequence[GroundTruthAnnotation] = (),
                 session_id: str | None = None,
                 dataset_id: str = "",
                 created_at: str | None = None):
        self.session_id = session_id or uuid.uuid4().hex
        self.dataset_id = dataset_id
        self.created_at = created_at or utc_now()
        self.detections = detections
        self.provided_ground_truth = tuple(ground_truth)
        self._events: list[CorrectionEvent] = []
        self._reverted: set[int] = set()
        self._eliminations: dict[str, set[int]] = {}
        self._reannotations: dict[str, list[tuple[int, BBox]]] = {}
        self._added: list[tuple[int, GroundTruthAnnotation]] = []
        self._lock = threading.RLock()

    # -- log access --------------------------------------------------

    @property
    def events(self) -> tuple[CorrectionEvent, ...]:
        with self._lock:
            return tuple(self._events)

    def __len__(self) -> int:
        return len(self._events)

    # -- derived state -----------------------------------------------

    def is_active(self, detection_id: str) -> bool:
        with self._lock:
            if self.detections.get(detection_id) is None:
                return False
            return not (self._eliminations.get(detection_id, set()) - self._reverted)

    def effective_bbox(self, detection_id: str) -> BBox:
        det = self.detections.get(detection_id)
        if det is None:
            raise UnknownDetection(f"no detection {detection_id!r}")
        with self._lock:
            for index, bbox in reversed(self._reannotations.get(detection_id, [])):
                if index not in self._reverted:
                    return bbox
        return det.bbox

    def effective_detections(self) -> list[Detection]:
        """Active detections in dataset order, with re-annotated boxes applied."""
        with self._lock:
            result = []
            for det in self.detections:
                if not self.is_active(det.detection_id):
                    continue
                bbox = self.effective_bbox(det.detection_id)
                result.append(det if bbox == det.bbox else replace(det, bbox=bbox))
            return result

    def added_annotations(self) -> tuple[GroundTruthAnnotation, ...]:
        with self._lock:
            return tuple(ann for index, ann in self._added if index not in self._reverted)

    def effective_ground_truth(self) -> tuple[GroundTruthAnnotation, ...]:
        return self.provided_ground_truth + self.added_annotations()

    # -- event validation and append -----------------------------------

    def _validate(self, kind: str, payload: dict) -> dict:
        """Check an event against current state; return the normalized payload."""
        if kind == KIND_ELIMINATE:
            ids = payload.get("detection_ids")
            if not isinstance(ids, (list, tuple)) or not ids:
                raise InvalidEvent("eliminate_fp needs a non-empty detection id list")
            if len(set(ids)) != len(ids):
                raise InvalidEvent("duplicate ids in elimination batch")
            for detection_id in ids:
                if self.detections.get(detection_id) is None:
                    raise UnknownDetection(f"no detection {detection_id!r}",
                                           detection_id=detection_id)
                if not self.is_active(detection_id):
                    raise AlreadyEliminated(f"detection {detection_id!r} already eliminated",
                                            detection_id=detection_id)
            return {"detection_ids": list(ids)}
        if kind == KIND_REANNOTATE:
            detection_id = payload.get("detection_id")
            if self.detections.get(detection_id) is None:
                raise UnknownDetection(f"no detection {detection_id!r}")
            if not self.is_active(detection_id):
                raise AlreadyEliminated(f"detection {detection_id!r} already eliminated")
            bbox = _bbox_from_payload(payload.get("bbox"), context="reannotate_bbox")
            return {"detection_id": detection_id, "bbox": bbox.as_list()}
        if kind == KIND_ADD_FN:
            image_id = payload.get("image_id")
            if not isinstance(image_id, str) or not image_id:
                raise InvalidEvent("add_false_negative needs an image_id")
            class_label = payload.get("class")
            if class_label not in self.detections.vocabulary:
                raise UnknownClass(f"class {class_label!r} not in vocabulary")
            bbox = _bbox_from_payload(payload.get("bbox"), context="add_false_negative")
            return {"image_id": image_id, "class": class_label, "bbox": bbox.as_list()}
        if kind == KIND_REVERT:
            target = payload.get("target")
            if not isinstance(target, int) or isinstance(target, bool) \
                    or not 0 <= target < len(self._events):
                raise InvalidEvent(f"revert target {target!r} is not an earlier event")
            if self._events[target].kind == KIND_REVERT:
                raise InvalidEvent("cannot revert a revert event")
            if target in self._reverted:
                raise InvalidEvent(f"event {target} is already reverted")
            return {"target": target}
        raise InvalidEvent(f"unknown event kind {kind!r}")

    def _apply(self, event: CorrectionEvent) -> None:
        if event.kind == KIND_ELIMINATE:
            for detection_id in event.payload["detection_ids"]:
                self._eliminations.setdefault(detection_id, set()).add(event.index)
        elif event.kind == KIND_REANNOTATE:
            bbox = _bbox_from_payload(event.payload["bbox"], context="reannotate_bbox")
            self._reannotations.setdefault(event.payload["detection_id"], []) \
                .append((event.index, bbox))
        elif event.kind == KIND_ADD_FN:
            ann = GroundTruthAnnotation(
                image_id=event.payload["image_id"],
                class_label=event.payload["class"],
                bbox=_bbox_from_payload(event.payload["bbox"], context="add_false_negative"),
                source=GT_SOURCE_USER_ADDED,
            )
            self._added.append((event.index, ann))
        elif event.kind == KIND_REVERT:
            self._reverted.add(event.payload["target"])

    def append_event(self, kind: str, payload: dict, actor: str = "user",
                     at: str | None = None) -> CorrectionEvent:
        """Validate and append one event; rejection leaves the log unchanged."""
        with self._lock:
            normalized = self._validate(kind, payload)
            event = CorrectionEvent(
                index=len(self._events),
                kind=kind,
                payload=normalized,
                actor=actor,
                at=at or utc_now(),
            )
            self._events.append(event)
            self._apply(event)
            return event

    def eliminate_false_positives(self, detection_ids: Sequence[str],
                                  actor: str = "user", at: str | None = None) -> CorrectionEvent:
        return self.append_event(KIND_ELIMINATE, {"detection_ids": list(detection_ids)},
                                 actor, at)

    def reannotate_bbox(self, detection_id: str, bbox: BBox | Sequence[float],
                        actor: str = "user", at: str | None = None) -> CorrectionEvent:
        raw = bbox.as_list() if isinstance(bbox, BBox) else list(bbox)
        return self.append_event(KIND_REANNOTATE,
                                 {"detection_id": detection_id, "bbox": raw}, actor, at)

    def add_false_negative(self, image_id: str, class_label: str,
                           bbox: BBox | Sequence[float],
                           actor: str = "user", at: str | None = None) -> CorrectionEvent:
        raw = bbox.as_list() if isinstance(bbox, BBox) else list(bbox)
        return self.append_event(KIND_ADD_FN,
                                 {"image_id": image_id, "class": class_label, "bbox": raw},
                                 actor, at)

    def revert(self, target_index: int, actor: str = "user",
               at: str | None = None) -> CorrectionEvent:
        return self.append_event(KIND_REVERT, {"target": target_index}, actor, at)

    # -- projections ----------------------------------------------------

    def projection_series(self, class_label: str) -> list[ProjectionSnapshot]:
        """Confidence mean/variance of the class after every event that changed it.

        Starts with the pre-correction baseline at after_event=-1; events that
        leave the class's active set unchanged (re-annotations, FN additions,
        unrelated eliminations) add no snapshot.
        """
        class_detections = self.detections.for_class(class_label)
        if not class_detections:
            raise NoSuchClass(f"no detections with class {class_label!r}")
        with self._lock:
            events = tuple(self._events)
        elim_events: dict[str, set[int]] = {}
        reverted: set[int] = set()
        class_ids = {d.detection_id for d in class_detections}

        def snapshot(after_event: int) -> ProjectionSnapshot:
            confidences = [d.confidence for d in class_detections
                           if not (elim_events.get(d.detection_id, set()) - reverted)]
            n = len(confidences)
            if n == 0:
                return ProjectionSnapshot(class_label, after_event, 0, None, None, True)
            mean = sum(confidences) / n
            var = sum((c - mean) ** 2 for c in confidences) / (n - 1) if n > 1 else 0.0
            return ProjectionSnapshot(class_label, after_event, n, mean, var, False)

        series = [snapshot(-1)]
        for event in events:
            touches = False
            if event.kind == KIND_ELIMINATE:
                for detection_id in event.payload["detection_ids"]:
                    elim_events.setdefault(detection_id, set()).add(event.index)
                touches = bool(set(event.payload["detection_ids"]) & class_ids)
            elif event.kind == KIND_REVERT:
                target = event.payload["target"]
                reverted.add(target)
                target_event = events[target]
                touches = (target_event.kind == KIND_ELIMINATE
                           and bool(set(target_event.payload["detection_ids"]) & class_ids))
            if touches:
                series.append(snapshot(event.index))
        return series

    # -- ground truth vs predictions -------------------------------------

    def gt_prediction_mapping(self, image_id: str) -> MappingReport:
        """Greedy highest-IoU-first matching of ground truth to active predictions.

        Matching is per class at IoU >= 0.5; every ground-truth entry and
        every active prediction lands in exactly one bucket.
        """
        gt_entries = [
            GtEntry(i, ann.class_label, ann.bbox, ann.source)
            for i, ann in enumerate(a for a in self.effective_ground_truth()
                                    if a.image_id == image_id)
        ]
        predictions = [d for d in self.effective_detections() if d.image_id == image_id]
        if not gt_entries and not predictions:
            raise UnknownImage(f"image {image_id!r} has no ground truth or active detections")

        candidates = [
            (entry.gt_index, det.detection_id, iou(entry.bbox, det.bbox))
            for entry in gt_entries
            for det in predictions
            if det.class_label == entry.class_label
        ]
        candidates = [c for c in candidates if c[2] >= IOU_MATCH_THRESHOLD]
        candidates.sort(key=lambda c: (-c[2], c[0], c[1]))
        class_of = {e.gt_index: e.class_label for e in gt_entries}
        matched_gt: set[int] = set()
        matched_det: set[str] = set()
        matches = []
        for gt_index, detection_id, overlap in candidates:
            if gt_index in matched_gt or detection_id in matched_det:
                continue
            matched_gt.add(gt_index)
            matched_det.add(detection_id)
            matches.append(MatchedPair(class_of[gt_index], gt_index, detection_id, overlap))
        return MappingReport(
            image_id=image_id,
            ground_truth=tuple(gt_entries),
            matches=tuple(matches),
            unmatched_gt=tuple(e.gt_index for e in gt_entries if e.gt_index not in matched_gt),
            unmatched_predictions=tuple(d.detection_id for d in predictions
                                        if d.detection_id not in matched_det),
        )

    # -- export ----------------------------------------------------------

    def export_annotations(self) -> list[GroundTruthAnnotation]:
        """Surviving detections (with effective boxes) plus user-added annotations.

        Ordered by (image_id, class, id); user additions order by their event
        index within the same image and class.
        """
        keyed: list[tuple[tuple[str, str, str], GroundTruthAnnotation]] = []
        for det in self.effective_detections():
            ann = GroundTruthAnnotation(det.image_id, det.class_label, det.bbox)
            keyed.append(((det.image_id, det.class_label, det.detection_id), ann))
        with self._lock:
            added = [(index, ann) for index, ann in self._added
                     if index not in self._reverted]
        for index, ann in added:
            keyed.append(((ann.image_id, ann.class_label, f"fn#{index:08d}"), ann))
        keyed.sort(key=lambda item: item[0])
        return [ann for _, ann in keyed]

    def export_text(self) -> str:
        """The export as ground-truth JSONL, ready to write or serve."""
        return serialize_ground_truth(self.export_annotations())


# -- log persistence and replay ------------------------------------------


def event_record(event: CorrectionEvent) -> dict:
    return {
        "index": event.index,
        "kind": event.kind,
        "payload": event.payload,
        "actor": event.actor,
        "at": event.at,
    }


def events_to_jsonl(events: Iterable[CorrectionEvent]) -> str:
    return "".join(json.dumps(event_record(e)) + "\n" for e in events)


def events_from_jsonl(stream: Iterable[str]) -> list[CorrectionEvent]:
    """Parse a persisted event log; malformed lines raise CorruptLog."""
    events = []
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            events.append(CorrectionEvent(
                index=record["index"],
                kind=record["kind"],
                payload=record["payload"],
                actor=record["actor"],
                at=record["at"],
            ))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CorruptLog(f"unreadable event at line {line_no}: {exc}",
                             line_no=line_no) from exc
    return events


def replay(events: Iterable[CorrectionEvent], detections: DetectionSet,
           ground_truth: Sequence[GroundTruthAnnotation] = (),
           session_id: str | None = None, dataset_id: str = "",
           created_at: str | None = None) -> Session:
    """Rebuild a session by folding its log; the first bad event raises CorruptLog."""
    session = Session(detections, ground_truth, session_id=session_id,
                      dataset_id=dataset_id, created_at=created_at)
    for position, event in enumerate(events):
        if event.index != position:
            raise CorruptLog(
                f"event index {event.index} at log position {position}", index=position)
        if not isinstance(event.payload, dict):
            raise CorruptLog(f"event {position} payload is not an object", index=position)
        try:
            session.append_event(event.kind, event.payload, event.actor, event.at)
        except DetlensError as exc:
            raise CorruptLog(f"event {position}: {exc.message}", index=position) from exc
    return session
