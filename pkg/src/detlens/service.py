"""HTTP facade over the store, metrics, correction and totem modules.

Every route delegates to a library call; module errors map onto a fixed
registry of machine-readable codes (validation -> 400, missing -> 404,
conflict -> 409). State lives in a FileStore, so a restart replays the
persisted event logs and reproduces the same responses.
"""

from __future__ import annotations

import argparse
import json
import mimetypes
import os
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse, PlainTextResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import correction, metrics, totem
from .errors import DetlensError, UnknownImage
from .ingest import detection_record
from .store import Dataset, FileStore

DEFAULT_PAGE_LIMIT = 200

_STATUS_BY_CATEGORY = {
    "validation": 400,
    "missing": 404,
    "conflict": 409,
    "corrupt": 500,
}


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: Path
    image_dir: Path | None = None
    host: str = "127.0.0.1"
    port: int = 8000

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        data_dir = os.environ.get("DETLENS_DATA_DIR", "./data")
        image_dir = os.environ.get("DETLENS_IMAGE_DIR")
        return cls(
            data_dir=Path(data_dir),
            image_dir=Path(image_dir) if image_dir else None,
            host=os.environ.get("DETLENS_HOST", "127.0.0.1"),
            port=int(os.environ.get("DETLENS_PORT", "8000")),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        raw = json.loads(Path(path).read_text())
        return cls(
            data_dir=Path(raw["data_dir"]),
            image_dir=Path(raw["image_dir"]) if raw.get("image_dir") else None,
            host=raw.get("host", "127.0.0.1"),
            port=int(raw.get("port", 8000)),
        )


def _error_body(code: str, message: str, details: dict | None = None) -> dict:
    return {"code": code, "message": message, "details": details or {}}


def _snapshot_json(snap: correction.ProjectionSnapshot) -> dict:
    return {
        "class": snap.class_label,
        "after_event": snap.after_event,
        "n_remaining": snap.n_remaining,
        "mean_confidence": snap.mean_confidence,
        "variance_confidence": snap.variance_confidence,
        "empty": snap.empty,
    }


def _correlation_json(report: metrics.CorrelationReport) -> dict:
    return {
        "points": [{"id": pid, "x": p[0], "y": p[1]}
                   for pid, p in zip(report.point_ids, report.points)],
        "pearson_r": report.pearson_r,
        "undefined_reason": report.undefined_reason,
        "outlier_ids": list(report.outlier_ids),
    }


def create_app(config: ServiceConfig) -> FastAPI:
    """Build the application; recovers persisted state before serving."""
    store = FileStore(config.data_dir)
    app = FastAPI(title="detlens", openapi_url="/openapi.json")
    app.state.store = store
    app.state.config = config
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    @app.exception_handler(DetlensError)
    async def handle_detlens_error(request: Request, exc: DetlensError):
        status = _STATUS_BY_CATEGORY.get(exc.category, 400)
        return JSONResponse(status_code=status,
                            content=_error_body(exc.code, exc.message, exc.details))

    @app.exception_handler(StarletteHTTPException)
    async def handle_http_error(request: Request, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else "http_error"
        return JSONResponse(status_code=exc.status_code,
                            content=_error_body(code, str(exc.detail)))

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content=_error_body("validation_error", "invalid request",
                                                {"errors": exc.errors()}))

    def profiles_for(dataset: Dataset) -> list[totem.PersonProfile]:
        return totem.build_profiles(dataset.captions, dataset.detections,
                                    dataset.pipeline, dataset.person_images)

    # -- datasets -----------------------------------------------------

    @app.post("/datasets")
    def register_dataset(body: dict):
        paths = {k: v for k, v in body.items()
                 if k in ("detections", "vocabulary", "captions", "ground_truth",
                          "stopwords", "lemmas", "person_images") and v}
        record = store.register_dataset(paths, image_dir=body.get("image_dir"))
        return {"dataset_id": record.dataset_id, "digest": record.digest}

    @app.get("/datasets")
    def list_datasets():
        return {"datasets": [r.to_json() for r in store.list_datasets()]}

    @app.get("/datasets/{dataset_id}/classes")
    def list_classes(dataset_id: str):
        dataset = store.dataset(dataset_id)
        counts: dict[str, int] = {}
        images: dict[str, set[str]] = {}
        for det in dataset.detections:
            counts[det.class_label] = counts.get(det.class_label, 0) + 1
            images.setdefault(det.class_label, set()).add(det.image_id)
        return {"classes": [
            {"class": label, "n_detections": counts.get(label, 0),
             "n_images": len(images.get(label, ()))}
            for label in dataset.vocabulary
        ]}

    @app.get("/datasets/{dataset_id}/classes/{class_label}/detections")
    def list_class_detections(dataset_id: str, class_label: str,
                              limit: int = Query(DEFAULT_PAGE_LIMIT, ge=1),
                              offset: int = Query(0, ge=0)):
        dataset = store.dataset(dataset_id)
        members = sorted(dataset.detections.for_class(class_label),
                         key=lambda d: d.detection_id)
        page = members[offset:offset + limit]
        return {"total": len(members), "limit": limit, "offset": offset,
                "detections": [detection_record(d) for d in page]}

    # -- metrics ------------------------------------------------------

    @app.get("/datasets/{dataset_id}/metrics/class-stats")
    def class_stats_route(dataset_id: str):
        dataset = store.dataset(dataset_id)
        return {"variance": "sample (n-1), 0 for n=1", "classes": [
            {"class": s.class_label, "n": s.n, "mean_confidence": s.mean_confidence,
             "variance_confidence": s.variance_confidence, "mean_bbox_area": s.mean_bbox_area}
            for s in metrics.all_class_stats(dataset.detections)
        ]}

    @app.get("/datasets/{dataset_id}/metrics/confidence-size")
    def confidence_size_route(dataset_id: str):
        dataset = store.dataset(dataset_id)
        return _correlation_json(metrics.confidence_size_correlation(dataset.detections))

    @app.get("/datasets/{dataset_id}/metrics/clutter")
    def clutter_route(dataset_id: str):
        dataset = store.dataset(dataset_id)
        scores = metrics.clutter_scores(dataset.detections)
        series = (metrics.clutter_confidence_series(dataset.detections)
                  if len(scores) >= 2 else None)
        return {
            "images": [{"image_id": s.image_id, "rho": s.rho, "n_objects": s.n_objects,
                        "avg_confidence": s.avg_confidence} for s in scores],
            "correlation": _correlation_json(series) if series else None,
        }

    @app.get("/datasets/{dataset_id}/metrics/report")
    def metrics_report_route(dataset_id: str):
        dataset = store.dataset(dataset_id)
        return PlainTextResponse(metrics.render_report_csv(dataset.detections),
                                 media_type="text/csv")

    @app.get("/datasets/{dataset_id}/class-proportions")
    def class_proportions_route(dataset_id: str):
        dataset = store.dataset(dataset_id)
        return {"proportions": [
            {"class": p.class_label, "image_count": p.image_count,
             "proportion": p.proportion}
            for p in correction.class_proportions(dataset.detections)
        ]}

    # -- sessions -----------------------------------------------------

    @app.post("/sessions")
    def create_session(body: dict):
        dataset_id = body.get("dataset_id", "")
        session = store.create_session(dataset_id)
        return {"session_id": session.session_id, "dataset_id": session.dataset_id,
                "created_at": session.created_at}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.session(session_id)
        return {
            "session_id": session.session_id,
            "dataset_id": session.dataset_id,
            "created_at": session.created_at,
            "n_events": len(session.events),
            "events": [correction.event_record(e) for e in session.events],
        }

    @app.post("/sessions/{session_id}/events")
    def post_event(session_id: str, body: dict):
        kind = body.get("kind", "")
        payload = body.get("payload", {})
        actor = body.get("actor", "user")
        event = store.append_event(session_id, kind, payload, actor)
        return correction.event_record(event)

    @app.get("/sessions/{session_id}/detections")
    def session_detections(session_id: str, image_id: str | None = None,
                           class_label: str | None = Query(None, alias="class"),
                           limit: int = Query(DEFAULT_PAGE_LIMIT, ge=1),
                           offset: int = Query(0, ge=0)):
        session = store.session(session_id)
        active = session.effective_detections()
        if image_id is not None:
            active = [d for d in active if d.image_id == image_id]
        if class_label is not None:
            active = [d for d in active if d.class_label == class_label]
        active.sort(key=lambda d: d.detection_id)
        page = active[offset:offset + limit]
        return {"total": len(active), "limit": limit, "offset": offset,
                "detections": [detection_record(d) for d in page]}

    @app.get("/sessions/{session_id}/projection/{class_label}")
    def projection_route(session_id: str, class_label: str):
        session = store.session(session_id)
        return {"class": class_label,
                "series": [_snapshot_json(s) for s in session.projection_series(class_label)]}

    @app.get("/sessions/{session_id}/mapping/{image_id:path}")
    def mapping_route(session_id: str, image_id: str):
        session = store.session(session_id)
        report = session.gt_prediction_mapping(image_id)
        return {
            "image_id": report.image_id,
            "ground_truth": [
                {"gt_index": e.gt_index, "class": e.class_label,
                 "bbox": e.bbox.as_list(), "source": e.source}
                for e in report.ground_truth
            ],
            "matches": [
                {"class": m.class_label, "gt_index": m.gt_index,
                 "detection_id": m.detection_id, "iou": m.iou}
                for m in report.matches
            ],
            "unmatched_gt": list(report.unmatched_gt),
            "unmatched_predictions": list(report.unmatched_predictions),
        }

    @app.get("/sessions/{session_id}/export")
    def export_route(session_id: str):
        session = store.session(session_id)
        return PlainTextResponse(session.export_text(),
                                 media_type="application/x-ndjson")

    # -- totem --------------------------------------------------------

    @app.get("/datasets/{dataset_id}/totem/graph")
    def totem_graph_route(dataset_id: str, threshold: int = Query(1, ge=1),
                          format: str = "json"):
        dataset = store.dataset(dataset_id)
        graph = totem.build_graph(profiles_for(dataset), threshold)
        if format == "tsv":
            return PlainTextResponse(totem.render_edge_list(graph),
                                     media_type="text/tab-separated-values")
        return totem.graph_node_link(graph)

    @app.get("/datasets/{dataset_id}/totem/cliques")
    def totem_cliques_route(dataset_id: str, min_size: int = Query(2, ge=2),
                            threshold: int = Query(1, ge=1)):
        dataset = store.dataset(dataset_id)
        graph = totem.build_graph(profiles_for(dataset), threshold)
        cliques = totem.enumerate_cliques(graph, min_size)
        return {"min_size": min_size, "threshold": threshold,
                "cliques": [list(c) for c in cliques]}

    @app.get("/datasets/{dataset_id}/totem/similarity")
    def totem_similarity_route(dataset_id: str, format: str = "json"):
        dataset = store.dataset(dataset_id)
        matrix = totem.similarity_matrix(profiles_for(dataset))
        if format == "csv":
            return PlainTextResponse(totem.render_similarity_csv(matrix),
                                     media_type="text/csv")
        return {
            "person_ids": list(matrix.person_ids),
            "values": [[float(v) for v in row] for row in matrix.values],
            "degenerate_ids": sorted(matrix.degenerate_ids),
        }

    @app.get("/datasets/{dataset_id}/totem/groups")
    def totem_groups_route(dataset_id: str,
                           threshold: float = Query(0.8, gt=0.0, le=1.0),
                           size: int = Query(8, ge=2)):
        dataset = store.dataset(dataset_id)
        matrix = totem.similarity_matrix(profiles_for(dataset))
        groups = totem.find_groups(matrix, threshold, size)
        return {"threshold": threshold, "size": size,
                "groups": [{"members": list(g.members),
                            "min_similarity": g.min_similarity} for g in groups]}

    # -- images -------------------------------------------------------

    @app.get("/images/{image_id:path}")
    def image_route(image_id: str):
        if config.image_dir is None:
            raise UnknownImage("no image directory configured")
        base = config.image_dir.resolve()
        candidates = []
        exact = base / image_id
        if exact.is_file():
            candidates.append(exact)
        else:
            parent = (base / image_id).parent
            stem = Path(image_id).name
            if parent.is_dir():
                candidates = sorted(p for p in parent.glob(f"{stem}.*") if p.is_file())
        for path in candidates:
            resolved = path.resolve()
            if resolved.is_relative_to(base):
                media_type = mimetypes.guess_type(resolved.name)[0] or "application/octet-stream"
                return FileResponse(resolved, media_type=media_type)
        raise UnknownImage(f"no image file for {image_id!r}")

    return app


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="detlens-service",
                                     description="Run the detlens HTTP service")
    parser.add_argument("--config", help="JSON config file (data_dir, image_dir, host, port)")
    parser.add_argument("--data-dir", help="override data directory")
    parser.add_argument("--image-dir", help="override image directory")
    parser.add_argument("--host")
    parser.add_argument("--port", type=int)
    args = parser.parse_args(argv)

    config = ServiceConfig.from_file(args.config) if args.config else ServiceConfig.from_env()
    if args.data_dir:
        config = ServiceConfig(Path(args.data_dir), config.image_dir, config.host, config.port)
    if args.image_dir:
        config = ServiceConfig(config.data_dir, Path(args.image_dir), config.host, config.port)
    if args.host:
        config = ServiceConfig(config.data_dir, config.image_dir, args.host, config.port)
    if args.port:
        config = ServiceConfig(config.data_dir, config.image_dir, config.host, args.port)

    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    main()
