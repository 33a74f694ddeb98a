"""File-backed dataset registry and session persistence.

Datasets are referenced in place: a record stores the source file paths
plus a content digest, and the files are re-read on startup. Sessions
persist as a small JSON meta file plus an append-only JSONL event log;
recovery replays the log and refuses to start on the first corrupt line.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .correction import CorrectionEvent, Session, event_record, events_from_jsonl, replay
from .errors import CorruptLog, IngestError, UnknownDataset, UnknownSession
from .ingest import (
    CaptionDoc,
    ClassVocabulary,
    DetectionSet,
    GroundTruthAnnotation,
    parse_captions,
    parse_detections,
    parse_ground_truth,
    parse_person_images,
    parse_vocabulary,
)
from .totem import TokenPipelineConfig, load_lemma_table, load_stopwords

DATASET_FILE_KEYS = ("detections", "vocabulary", "captions", "ground_truth",
                     "stopwords", "lemmas", "person_images")
REQUIRED_FILE_KEYS = ("detections", "vocabulary")

CONVENTIONAL_NAMES = {
    "detections": "detections.jsonl",
    "vocabulary": "vocabulary.txt",
    "captions": "captions.jsonl",
    "ground_truth": "ground_truth.jsonl",
    "stopwords": "stopwords.txt",
    "lemmas": "lemmas.tsv",
    "person_images": "person_images.jsonl",
}


@dataclass(frozen=True)
class Dataset:
    """Everything parsed from one dataset's files, immutable once loaded."""

    dataset_id: str
    vocabulary: ClassVocabulary
    detections: DetectionSet
    ground_truth: tuple[GroundTruthAnnotation, ...]
    captions: tuple[CaptionDoc, ...]
    pipeline: TokenPipelineConfig
    person_images: dict[str, frozenset[str]] | None
    digest: str


@dataclass
class DatasetRecord:
    dataset_id: str
    paths: dict[str, str]
    image_dir: str | None
    loaded_at: str
    digest: str

    def to_json(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "paths": self.paths,
            "image_dir": self.image_dir,
            "loaded_at": self.loaded_at,
            "digest": self.digest,
        }


def resolve_data_dir(data_dir: str | Path,
                     overrides: dict[str, str | None] | None = None) -> dict[str, str]:
    """Map file keys to paths using conventional names inside ``data_dir``.

    Optional files that do not exist are simply omitted; explicit overrides
    win over convention.
    """
    data_dir = Path(data_dir)
    paths: dict[str, str] = {}
    overrides = overrides or {}
    for key in DATASET_FILE_KEYS:
        override = overrides.get(key)
        if override:
            paths[key] = str(override)
            continue
        candidate = data_dir / CONVENTIONAL_NAMES[key]
        if candidate.exists() or key in REQUIRED_FILE_KEYS:
            paths[key] = str(candidate)
    return paths


def content_digest(paths: dict[str, str]) -> str:
    digest = hashlib.sha256()
    for key in sorted(paths):
        digest.update(key.encode())
        digest.update(b"\0")
        digest.update(Path(paths[key]).read_bytes())
        digest.update(b"\0")
    return digest.hexdigest()


def load_dataset(paths: dict[str, str], lenient: bool = False) -> Dataset:
    """Parse every referenced file into a Dataset; ids derive from content."""
    for key in REQUIRED_FILE_KEYS:
        if key not in paths:
            raise UnknownDataset(f"dataset paths missing required {key!r}")
    present = {key: value for key, value in paths.items() if value}
    digest = content_digest(present)

    def lines(key: str) -> list[str]:
        return Path(present[key]).read_text(encoding="utf-8").splitlines()

    def parse(key: str, parser, *args, **kwargs):
        # Diagnostics should name the offending file, not just the line.
        try:
            return parser(lines(key), *args, **kwargs)
        except IngestError as exc:
            exc.details["file"] = present[key]
            raise

    vocabulary = parse("vocabulary", parse_vocabulary)
    detections = parse("detections", parse_detections, vocabulary, lenient=lenient)
    ground_truth = tuple(
        parse("ground_truth", parse_ground_truth, vocabulary, lenient=lenient)
    ) if "ground_truth" in present else ()
    captions = tuple(parse("captions", parse_captions)) if "captions" in present else ()
    stopwords = (parse("stopwords", load_stopwords)
                 if "stopwords" in present else frozenset())
    lemmas = parse("lemmas", load_lemma_table) if "lemmas" in present else {}
    person_images = (parse("person_images", parse_person_images)
                     if "person_images" in present else None)
    return Dataset(
        dataset_id=f"ds-{digest[:12]}",
        vocabulary=vocabulary,
        detections=detections,
        ground_truth=ground_truth,
        captions=captions,
        pipeline=TokenPipelineConfig(stopwords=stopwords, lemma_table=lemmas),
        person_images=person_images,
        digest=digest,
    )


@dataclass
class _SessionEntry:
    session: Session
    lock: threading.Lock = field(default_factory=threading.Lock)


class FileStore:
    """Datasets and sessions under one root directory.

    Layout: ``datasets/<id>.json`` records, ``sessions/<id>.json`` metas,
    ``sessions/<id>.events.jsonl`` logs. Appends to one session serialize
    on a per-session lock and reach disk before the call returns.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.datasets_dir = self.root / "datasets"
        self.sessions_dir = self.root / "sessions"
        self.datasets_dir.mkdir(parents=True, exist_ok=True)
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self._records: dict[str, DatasetRecord] = {}
        self._datasets: dict[str, Dataset] = {}
        self._sessions: dict[str, _SessionEntry] = {}
        self._lock = threading.Lock()
        self._recover()

    # -- recovery -----------------------------------------------------

    def _recover(self) -> None:
        for record_path in sorted(self.datasets_dir.glob("*.json")):
            record = json.loads(record_path.read_text())
            dataset = load_dataset(record["paths"])
            self._records[dataset.dataset_id] = DatasetRecord(
                dataset_id=record["dataset_id"],
                paths=record["paths"],
                image_dir=record.get("image_dir"),
                loaded_at=record["loaded_at"],
                digest=record["digest"],
            )
            self._datasets[dataset.dataset_id] = dataset
        for meta_path in sorted(self.sessions_dir.glob("*.json")):
            meta = json.loads(meta_path.read_text())
            log_path = self._log_path(meta["session_id"])
            events: list[CorrectionEvent] = []
            if log_path.exists():
                try:
                    events = events_from_jsonl(log_path.read_text().splitlines())
                except CorruptLog as exc:
                    raise CorruptLog(f"{log_path}: {exc.message}", **exc.details) from exc
            dataset = self._datasets.get(meta["dataset_id"])
            if dataset is None:
                raise UnknownDataset(
                    f"session {meta['session_id']} references missing dataset "
                    f"{meta['dataset_id']}")
            try:
                session = replay(events, dataset.detections, dataset.ground_truth,
                                 session_id=meta["session_id"],
                                 dataset_id=meta["dataset_id"],
                                 created_at=meta["created_at"])
            except CorruptLog as exc:
                raise CorruptLog(f"{log_path}: {exc.message}", **exc.details) from exc
            self._sessions[session.session_id] = _SessionEntry(session)

    # -- datasets -------------------------------------------------------

    def register_dataset(self, paths: dict[str, str],
                         image_dir: str | None = None) -> DatasetRecord:
        """Load a dataset from files and persist its record; idempotent by content."""
        dataset = load_dataset(paths)
        with self._lock:
            existing = self._records.get(dataset.dataset_id)
            if existing is not None:
                return existing
            record = DatasetRecord(
                dataset_id=dataset.dataset_id,
                paths={k: v for k, v in paths.items() if v},
                image_dir=image_dir,
                loaded_at=datetime.now(timezone.utc).isoformat(),
                digest=dataset.digest,
            )
            self._records[dataset.dataset_id] = record
            self._datasets[dataset.dataset_id] = dataset
            path = self.datasets_dir / f"{dataset.dataset_id}.json"
            path.write_text(json.dumps(record.to_json(), indent=2) + "\n")
            return record

    def list_datasets(self) -> list[DatasetRecord]:
        with self._lock:
            return sorted(self._records.values(), key=lambda r: r.dataset_id)

    def dataset(self, dataset_id: str) -> Dataset:
        try:
            return self._datasets[dataset_id]
        except KeyError:
            raise UnknownDataset(f"no dataset {dataset_id!r}") from None

    def dataset_record(self, dataset_id: str) -> DatasetRecord:
        try:
            return self._records[dataset_id]
        except KeyError:
            raise UnknownDataset(f"no dataset {dataset_id!r}") from None

    # -- sessions ---------------------------------------------------------

    def _log_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.events.jsonl"

    def create_session(self, dataset_id: str) -> Session:
        dataset = self.dataset(dataset_id)
        session = Session(dataset.detections, dataset.ground_truth,
                          session_id=uuid.uuid4().hex, dataset_id=dataset_id)
        meta = {
            "session_id": session.session_id,
            "dataset_id": dataset_id,
            "created_at": session.created_at,
        }
        with self._lock:
            (self.sessions_dir / f"{session.session_id}.json").write_text(
                json.dumps(meta, indent=2) + "\n")
            self._log_path(session.session_id).touch()
            self._sessions[session.session_id] = _SessionEntry(session)
        return session

    def session(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id].session
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None

    def append_event(self, session_id: str, kind: str, payload: dict,
                     actor: str = "user") -> CorrectionEvent:
        """Append one validated event and flush it to the session's log."""
        try:
            entry = self._sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None
        with entry.lock:
            event = entry.session.append_event(kind, payload, actor)
            with self._log_path(session_id).open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event_record(event)) + "\n")
                fh.flush()
            return event

    def list_sessions(self) -> list[Session]:
        with self._lock:
            return sorted((e.session for e in self._sessions.values()),
                          key=lambda s: s.session_id)
