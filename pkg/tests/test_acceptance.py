"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
Tolerances are pinned in the assertions; the reference values come from the
independent oracles in oracles.py.
"""

import functools
import json
import math
import random
import time

import pytest
from fastapi.testclient import TestClient

from detlens.cli import main as cli_main
from detlens.correction import Session, events_from_jsonl, events_to_jsonl, replay
from detlens.ingest import BBox, DetectionSet, GroundTruthAnnotation, parse_ground_truth
from detlens.metrics import (
    class_stats,
    clutter_confidence_series,
    clutter_density,
    confidence_size_correlation,
    pearson_r,
)
from detlens.service import ServiceConfig, create_app
from detlens.totem import (
    CooccurrenceGraph,
    PersonProfile,
    cosine,
    enumerate_cliques,
    find_groups,
    similarity_matrix,
)

from conftest import (
    VOCAB_LABELS,
    apply_random_events,
    make_detection,
    random_box,
    random_detection_set,
    random_ground_truth,
    write_dataset_dir,
)
from oracles import (
    oracle_clutter_rho,
    oracle_cosine,
    oracle_iou,
    oracle_maximal_cliques,
    oracle_mean,
    oracle_pearson,
    oracle_sample_variance,
)


def criterion(number, description):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {number} FAIL: {description}")
                raise
            print(f"ACCEPTANCE {number} PASS: {description}")
        return wrapper
    return decorate


@criterion(1, "clutter density matches brute-force evaluation; scale and "
              "translation laws hold on 1000 synthetic images in < 5 s")
def test_criterion_1_clutter_oracle(vocabulary):
    rng = random.Random(101)
    started = time.perf_counter()
    for _ in range(1000):
        n_boxes = rng.randint(1, 20)
        dets = [make_detection(f"d{i}", "img", rng.choice(VOCAB_LABELS),
                               random_box(rng), rng.random())
                for i in range(n_boxes)]
        rho = clutter_density(dets).rho
        expected = oracle_clutter_rho([d.bbox.as_list() for d in dets])
        assert abs(rho - expected) <= 1e-9 * abs(expected)

        s = rng.uniform(0.2, 5.0)
        scaled = [make_detection(d.detection_id, d.image_id, d.class_label,
                                 tuple(v * s for v in d.bbox.as_list()), d.confidence)
                  for d in dets]
        assert abs(clutter_density(scaled).rho - rho / s**2) <= 1e-9 * abs(rho / s**2)

        dx, dy = rng.uniform(0, 100), rng.uniform(0, 100)
        moved = [make_detection(d.detection_id, d.image_id, d.class_label,
                                (d.bbox.x1 + dx, d.bbox.y1 + dy,
                                 d.bbox.x2 + dx, d.bbox.y2 + dy), d.confidence)
                 for d in dets]
        assert abs(clutter_density(moved).rho - rho) <= 1e-9 * abs(rho)
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"took {elapsed:.2f}s"


@criterion(2, "class stats and both correlations match first-principles "
              "recomputation within 1e-9; hand fixture r == 0.6 within 1e-12")
def test_criterion_2_statistics_oracle(vocabulary):
    assert abs(pearson_r([1, 2, 3, 4], [2, 1, 4, 3]) - 0.6) <= 1e-12

    rng = random.Random(202)
    for _ in range(40):
        dset = random_detection_set(rng, vocabulary, n_images=8, max_per_image=12)
        assert len(dset) <= 100
        for label in dset.classes_present():
            confs = [d.confidence for d in dset.for_class(label)]
            areas = [d.bbox.area for d in dset.for_class(label)]
            stats = class_stats(dset, label)
            assert abs(stats.mean_confidence - oracle_mean(confs)) <= 1e-9
            assert abs(stats.variance_confidence - oracle_sample_variance(confs)) <= 1e-9
            assert abs(stats.mean_bbox_area - oracle_mean(areas)) \
                <= 1e-9 * max(1.0, oracle_mean(areas))

        labels = sorted(dset.classes_present())
        if len(labels) >= 2:
            xs = [oracle_mean([d.bbox.area for d in dset.for_class(c)]) for c in labels]
            ys = [oracle_mean([d.confidence for d in dset.for_class(c)]) for c in labels]
            report = confidence_size_correlation(dset)
            expected = oracle_pearson(xs, ys)
            if expected is None:
                assert report.pearson_r is None
            else:
                assert abs(report.pearson_r - expected) <= 1e-9
                assert -1.0 <= report.pearson_r <= 1.0

        images = sorted(dset.image_ids())
        if len(images) >= 2:
            xs = [oracle_clutter_rho([d.bbox.as_list() for d in dset.for_image(i)])
                  for i in images]
            ys = [oracle_mean([d.confidence for d in dset.for_image(i)])
                  for i in images]
            series = clutter_confidence_series(dset)
            expected = oracle_pearson(xs, ys)
            if expected is None:
                assert series.pearson_r is None
            else:
                assert abs(series.pearson_r - expected) <= 1e-9
                assert -1.0 <= series.pearson_r <= 1.0


@criterion(3, "projection fixture means are [0.6333.., 0.85]; mean-lift "
              "holds over 10,000 randomized eliminations")
def test_criterion_3_projection_semantics(vocabulary):
    dset = DetectionSet([
        make_detection("d1", "img1", "dog", (0, 0, 10, 10), 0.9),
        make_detection("d2", "img1", "dog", (20, 20, 40, 40), 0.8),
        make_detection("d3", "img2", "dog", (5, 5, 15, 15), 0.2),
    ], vocabulary)
    session = Session(dset)
    session.eliminate_false_positives(["d3"], at="2021-01-01T00:00:00+00:00")
    means = [s.mean_confidence for s in session.projection_series("dog")]
    assert abs(means[0] - 1.9 / 3) <= 1e-12
    assert abs(means[1] - 0.85) <= 1e-12

    rng = random.Random(303)
    eliminations = 0
    while eliminations < 10_000:
        data = random_detection_set(rng, vocabulary, n_images=6, max_per_image=12)
        session = Session(data)
        while True:
            candidates = {}
            for det in session.effective_detections():
                candidates.setdefault(det.class_label, []).append(det)
            eligible = {label: dets for label, dets in candidates.items()
                        if len(dets) >= 2}
            if not eligible or eliminations >= 10_000:
                break
            label = rng.choice(sorted(eligible))
            dets = eligible[label]
            mean_before = oracle_mean([d.confidence for d in dets])
            victims = [d for d in dets if abs(d.confidence - mean_before) > 1e-12]
            if not victims:
                break
            victim = rng.choice(victims)
            session.eliminate_false_positives([victim.detection_id],
                                              at="2021-01-01T00:00:00+00:00")
            series = session.projection_series(label)
            before, after = series[-2].mean_confidence, series[-1].mean_confidence
            assert abs(before - mean_before) <= 1e-12
            if victim.confidence < mean_before:
                assert after > before
            else:
                assert after < before
            eliminations += 1
    assert eliminations == 10_000


@criterion(4, "500 randomized event logs replay to byte-identical exports "
              "and projection series, including a serialize/deserialize cycle")
def test_criterion_4_replay_determinism(vocabulary):
    rng = random.Random(404)
    for _ in range(500):
        dset = random_detection_set(rng, vocabulary, n_images=4, max_per_image=5)
        gt = random_ground_truth(rng, dset, n=3)
        session = Session(dset, gt)
        apply_random_events(rng, session, rng.randint(1, 15))

        def fingerprint(s):
            series = {label: [json.dumps(snap.__dict__) for snap in
                              s.projection_series(label)]
                      for label in dset.classes_present()}
            return s.export_text(), json.dumps(series, sort_keys=True)

        text = events_to_jsonl(session.events)
        first = replay(events_from_jsonl(text.splitlines()), dset, gt)
        second = replay(events_from_jsonl(text.splitlines()), dset, gt)
        assert fingerprint(first) == fingerprint(second) == fingerprint(session)
        assert events_to_jsonl(first.events) == text


@criterion(5, "export -> parse_ground_truth round-trips to structurally "
              "equal annotations over randomized sessions")
def test_criterion_5_export_round_trip(vocabulary):
    rng = random.Random(505)
    for _ in range(60):
        dset = random_detection_set(rng, vocabulary)
        session = Session(dset, random_ground_truth(rng, dset))
        apply_random_events(rng, session, rng.randint(0, 20))
        exported = session.export_annotations()
        reparsed = parse_ground_truth(session.export_text().splitlines(),
                                      dset.vocabulary)
        assert [(a.image_id, a.class_label, a.bbox) for a in reparsed] == \
            [(a.image_id, a.class_label, a.bbox) for a in exported]


@criterion(6, "maximal cliques equal exhaustive enumeration on 200 random "
              "graphs of <= 14 nodes in < 30 s; path/triangle fixtures exact")
def test_criterion_6_clique_oracle():
    triangle = CooccurrenceGraph("abc", {("a", "b"): 1, ("b", "c"): 1,
                                         ("a", "c"): 1}, 1)
    assert enumerate_cliques(triangle, 2) == [("a", "b", "c")]
    path = CooccurrenceGraph("abc", {("a", "b"): 1, ("b", "c"): 1}, 1)
    assert enumerate_cliques(path, 2) == [("a", "b"), ("b", "c")]

    rng = random.Random(606)
    started = time.perf_counter()
    for _ in range(200):
        n = rng.randint(2, 14)
        density = rng.uniform(0.15, 0.75)
        nodes = [f"n{i:02d}" for i in range(n)]
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)
                 if rng.random() < density]
        graph = CooccurrenceGraph(
            nodes, {(nodes[i], nodes[j]): 1 for i, j in pairs}, 1)
        expected = {tuple(sorted(nodes[v] for v in clique))
                    for clique in oracle_maximal_cliques(n, pairs, min_size=2)}
        actual = enumerate_cliques(graph, 2)
        assert set(actual) == expected
        assert actual == sorted(actual, key=lambda c: (-len(c), c))
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"took {elapsed:.2f}s"


@criterion(7, "similarity matrix symmetric with unit diagonal; cosine "
              "fixture 4/sqrt(30) within 1e-12; 40x40 matrix; the seeded "
              "8-person block is recovered at group size 8")
def test_criterion_7_similarity_matrix():
    assert abs(cosine((1, 2, 0), (2, 1, 1)) - 4 / math.sqrt(30)) <= 1e-12
    assert abs(oracle_cosine((1, 2, 0), (2, 1, 1)) - 4 / math.sqrt(30)) <= 1e-12

    rng = random.Random(707)
    profiles = []
    for i in range(8):
        profiles.append(PersonProfile(f"g{i:02d}", frozenset(),
                                      (5, 2) + (0,) * 32))
    for j in range(32):
        counts = [0] * 34
        counts[2 + j] = rng.randint(1, 4)
        profiles.append(PersonProfile(f"x{j:02d}", frozenset(), tuple(counts)))
    matrix = similarity_matrix(profiles)
    assert matrix.values.shape == (40, 40)
    assert (matrix.values == matrix.values.T).all()
    for i, profile in enumerate(profiles):
        if any(profile.count_vector):
            assert matrix.values[i, i] == 1.0

    groups = find_groups(matrix, 0.8, 8)
    assert len(groups) == 1
    assert groups[0].members == tuple(f"g{i:02d}" for i in range(8))


@criterion(8, "IoU fixture [0,0,10,10] vs [0,0,10,5] is exactly 0.5 and "
              "matches at threshold; mapping buckets partition on random images")
def test_criterion_8_iou_mapping(vocabulary):
    det = make_detection("a", "img", "dog", (0, 0, 10, 5), 0.9)
    gt = [GroundTruthAnnotation("img", "dog", BBox(0, 0, 10, 10))]
    session = Session(DetectionSet([det], vocabulary), gt)
    report = session.gt_prediction_mapping("img")
    assert len(report.matches) == 1
    assert report.matches[0].iou == 0.5
    assert oracle_iou((0, 0, 10, 5), (0, 0, 10, 10)) == 0.5

    rng = random.Random(808)
    for _ in range(150):
        dset = random_detection_set(rng, vocabulary, n_images=1, max_per_image=8)
        gt = random_ground_truth(rng, dset, n=rng.randint(0, 8))
        session = Session(dset, gt)
        image_id = dset.image_ids()[0]
        report = session.gt_prediction_mapping(image_id)
        gt_here = [a for a in gt if a.image_id == image_id]
        preds = {d.detection_id for d in dset.for_image(image_id)}
        matched_gt = {m.gt_index for m in report.matches}
        matched_pred = {m.detection_id for m in report.matches}
        assert len(report.matches) <= min(len(gt_here) or 0, len(preds))
        assert matched_gt | set(report.unmatched_gt) == set(range(len(gt_here)))
        assert matched_gt.isdisjoint(report.unmatched_gt)
        assert matched_pred | set(report.unmatched_predictions) == preds
        assert matched_pred.isdisjoint(report.unmatched_predictions)
        for m in report.matches:
            assert m.iou >= 0.5


@criterion(9, "CLI and HTTP service produce byte-identical metrics CSVs "
              "and session exports for identical inputs")
def test_criterion_9_cli_service_parity(tmp_path, vocabulary):
    rng = random.Random(909)
    dset = random_detection_set(rng, vocabulary, n_images=5, max_per_image=6)
    gt = random_ground_truth(rng, dset, n=4)
    fixture_dir = write_dataset_dir(tmp_path / "fixture", dset, vocabulary.labels,
                                    ground_truth=gt,
                                    captions=[("P1", "a dog"), ("P2", "a cat")])

    config = ServiceConfig(data_dir=tmp_path / "data")
    client = TestClient(create_app(config))
    dataset_id = client.post("/datasets", json={
        "detections": str(fixture_dir / "detections.jsonl"),
        "vocabulary": str(fixture_dir / "vocabulary.txt"),
        "captions": str(fixture_dir / "captions.jsonl"),
        "ground_truth": str(fixture_dir / "ground_truth.jsonl"),
    }).json()["dataset_id"]

    # Metrics report: CLI file vs service body.
    out_file = tmp_path / "metrics.csv"
    assert cli_main(["metrics", "--data-dir", str(fixture_dir),
                     "--out", str(out_file)]) == 0
    service_csv = client.get(f"/datasets/{dataset_id}/metrics/report").text
    assert out_file.read_bytes() == service_csv.encode()

    # Session export: same events through the service and through the CLI.
    session_id = client.post("/sessions", json={"dataset_id": dataset_id}) \
        .json()["session_id"]
    shadow = Session(dset, gt)
    apply_random_events(rng, shadow, 12)
    for event in shadow.events:
        response = client.post(f"/sessions/{session_id}/events", json={
            "kind": event.kind, "payload": event.payload, "actor": event.actor})
        assert response.status_code == 200, response.text
    service_export = client.get(f"/sessions/{session_id}/export").text

    log_file = tmp_path / "events.jsonl"
    log_file.write_text(events_to_jsonl(shadow.events))
    export_file = tmp_path / "export.jsonl"
    assert cli_main(["session", "export", "--data-dir", str(fixture_dir),
                     "--log", str(log_file), "--out", str(export_file)]) == 0
    assert export_file.read_bytes() == service_export.encode()
