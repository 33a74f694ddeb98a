"""The file formats, CLI and HTTP service on one tiny dataset.

Writes a conventional data directory, validates it and renders the metrics
report through the CLI entry point, then drives the HTTP API in-process and
shows that the service export matches the CLI export byte for byte.
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from detlens.cli import main as cli
from detlens.service import ServiceConfig, create_app

root = Path(tempfile.mkdtemp(prefix="detlens-demo-"))
data = root / "dataset"
data.mkdir()

(data / "vocabulary.txt").write_text("person\ndog\n")
(data / "detections.jsonl").write_text("\n".join([
    json.dumps({"id": "d1", "image_id": "img1", "class": "dog",
                "bbox": [0, 0, 10, 10], "confidence": 0.9}),
    json.dumps({"id": "d2", "image_id": "img1", "class": "dog",
                "bbox": [10, 10, 20, 20], "confidence": 0.8}),
    json.dumps({"id": "d3", "image_id": "img2", "class": "person",
                "bbox": [0, 0, 40, 60], "confidence": 0.3}),
]) + "\n")
(data / "captions.jsonl").write_text(
    json.dumps({"person_id": "P1", "text": "a dog"}) + "\n"
    + json.dumps({"person_id": "P2", "text": "dog and person"}) + "\n")

print("== validate ==", flush=True)
cli(["validate", "--data-dir", str(data)])

print("\n== metrics report (note rho = 2/400 for img1) ==", flush=True)
cli(["metrics", "--data-dir", str(data)])

print("\n== the same dataset through the HTTP service ==")
client = TestClient(create_app(ServiceConfig(data_dir=root / "service-data")))
dataset_id = client.post("/datasets", json={
    "detections": str(data / "detections.jsonl"),
    "vocabulary": str(data / "vocabulary.txt"),
    "captions": str(data / "captions.jsonl"),
}).json()["dataset_id"]
print(f"  dataset_id: {dataset_id}")

session_id = client.post("/sessions", json={"dataset_id": dataset_id}) \
    .json()["session_id"]
client.post(f"/sessions/{session_id}/events", json={
    "kind": "eliminate_fp", "payload": {"detection_ids": ["d3"]}})
series = client.get(f"/sessions/{session_id}/projection/person").json()["series"]
print(f"  person projection after elimination: {series[-1]}")

service_export = client.get(f"/sessions/{session_id}/export").text
log = root / "events.jsonl"
session = client.get(f"/sessions/{session_id}").json()
log.write_text("".join(json.dumps(e) + "\n" for e in session["events"]))
out = root / "export-cli.jsonl"
cli(["session", "export", "--data-dir", str(data),
     "--log", str(log), "--out", str(out)])
print(f"\n== parity: CLI export == service export? "
      f"{out.read_text() == service_export} ==")
