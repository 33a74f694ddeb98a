"""Shared fixtures: tiny hand-checked datasets and random generators."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from detlens.ingest import (
    BBox,
    ClassVocabulary,
    Detection,
    DetectionSet,
    GroundTruthAnnotation,
)

VOCAB_LABELS = ("person", "dog", "cat", "car", "bicycle")


def make_detection(det_id, image_id, label, bbox, confidence):
    return Detection(det_id, image_id, label, BBox(*bbox), confidence)


@pytest.fixture
def vocabulary():
    return ClassVocabulary(VOCAB_LABELS)


@pytest.fixture
def dog_dataset(vocabulary):
    """Three dog detections with confidences 0.9 / 0.8 / 0.2 plus one person."""
    detections = [
        make_detection("d1", "img1", "dog", (0, 0, 10, 10), 0.9),
        make_detection("d2", "img1", "dog", (20, 20, 40, 40), 0.8),
        make_detection("d3", "img2", "dog", (5, 5, 15, 15), 0.2),
        make_detection("p1", "img2", "person", (0, 0, 50, 80), 0.6),
    ]
    return DetectionSet(detections, vocabulary)


def random_box(rng, span=500.0, max_side=200.0):
    x1 = rng.uniform(0, span)
    y1 = rng.uniform(0, span)
    return (x1, y1, x1 + rng.uniform(0.5, max_side), y1 + rng.uniform(0.5, max_side))


def random_detection_set(rng, vocabulary, n_images=6, max_per_image=5) -> DetectionSet:
    detections = []
    counter = 0
    for i in range(n_images):
        image_id = f"img{i}"
        for _ in range(rng.randint(1, max_per_image)):
            label = rng.choice(vocabulary.labels)
            detections.append(make_detection(
                f"det{counter}", image_id, label, random_box(rng),
                round(rng.random(), 6)))
            counter += 1
    return DetectionSet(detections, vocabulary)


def random_ground_truth(rng, detection_set, n=5):
    image_ids = detection_set.image_ids()
    return [
        GroundTruthAnnotation(rng.choice(image_ids),
                              rng.choice(detection_set.vocabulary.labels),
                              BBox(*random_box(rng)))
        for _ in range(n)
    ]


def apply_random_events(rng: random.Random, session, n_events: int) -> int:
    """Drive a session with a random but always-valid event stream."""
    applied = 0
    for step in range(n_events):
        at = f"2021-06-01T00:{step // 60 % 60:02d}:{step % 60:02d}+00:00"
        active = [d.detection_id for d in session.effective_detections()]
        revertable = [e.index for e in session.events
                      if e.kind != "revert"
                      and not any(r.kind == "revert" and r.payload["target"] == e.index
                                  for r in session.events)]
        choices = ["add_fn"]
        if active:
            choices += ["eliminate", "eliminate", "reannotate"]
        if revertable:
            choices.append("revert")
        kind = rng.choice(choices)
        if kind == "eliminate":
            k = rng.randint(1, min(3, len(active)))
            session.eliminate_false_positives(rng.sample(active, k), at=at)
        elif kind == "reannotate":
            session.reannotate_bbox(rng.choice(active), random_box(rng), at=at)
        elif kind == "add_fn":
            image = f"img{rng.randint(0, 9)}"
            label = rng.choice(session.detections.vocabulary.labels)
            session.add_false_negative(image, label, random_box(rng), at=at)
        else:
            session.revert(rng.choice(revertable), at=at)
        applied += 1
    return applied


def write_dataset_dir(tmp_path: Path, detections, vocabulary_labels,
                      ground_truth=(), captions=(), stopwords=(), lemmas=(),
                      person_images=()) -> Path:
    """Write a conventional dataset directory from in-memory pieces."""
    data = Path(tmp_path)
    data.mkdir(parents=True, exist_ok=True)
    det_lines = [json.dumps({
        "id": d.detection_id, "image_id": d.image_id, "class": d.class_label,
        "bbox": d.bbox.as_list(), "confidence": d.confidence}) for d in detections]
    (data / "detections.jsonl").write_text("".join(l + "\n" for l in det_lines))
    (data / "vocabulary.txt").write_text("".join(l + "\n" for l in vocabulary_labels))
    if ground_truth:
        gt_lines = [json.dumps({"image_id": a.image_id, "class": a.class_label,
                                "bbox": a.bbox.as_list()}) for a in ground_truth]
        (data / "ground_truth.jsonl").write_text("".join(l + "\n" for l in gt_lines))
    if captions:
        cap_lines = [json.dumps({"person_id": c[0], "text": c[1]}) for c in captions]
        (data / "captions.jsonl").write_text("".join(l + "\n" for l in cap_lines))
    if stopwords:
        (data / "stopwords.txt").write_text("".join(w + "\n" for w in stopwords))
    if lemmas:
        (data / "lemmas.tsv").write_text("".join(f"{t}\t{l}\n" for t, l in lemmas))
    if person_images:
        pi_lines = [json.dumps({"person_id": p, "image_id": i}) for p, i in person_images]
        (data / "person_images.jsonl").write_text("".join(l + "\n" for l in pi_lines))
    return data
