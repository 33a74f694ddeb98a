"""Batch command-line access: validate, metrics, totem exports, session replay.

Exit codes: 0 success, 1 validation failure, 2 usage error. Diagnostics go
to stderr; data goes to stdout or the ``--out`` file. Output ordering is
deterministic everywhere so golden-file comparisons are stable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import correction, metrics, totem
from .errors import DetlensError
from .store import Dataset, load_dataset, resolve_data_dir

EXIT_OK = 0
EXIT_VALIDATION = 1


def _add_dataset_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data-dir", default=".",
                        help="directory with conventionally named input files")
    parser.add_argument("--detections", help="detections JSONL (overrides --data-dir)")
    parser.add_argument("--vocabulary", help="vocabulary text file")
    parser.add_argument("--captions", help="captions JSONL")
    parser.add_argument("--ground-truth", dest="ground_truth", help="ground-truth JSONL")
    parser.add_argument("--stopwords", help="stop word list")
    parser.add_argument("--lemmas", help="lemma table TSV")
    parser.add_argument("--person-images", dest="person_images",
                        help="person->image mapping JSONL")


def _dataset_paths(args: argparse.Namespace) -> dict[str, str]:
    overrides = {
        "detections": args.detections,
        "vocabulary": args.vocabulary,
        "captions": args.captions,
        "ground_truth": args.ground_truth,
        "stopwords": args.stopwords,
        "lemmas": args.lemmas,
        "person_images": args.person_images,
    }
    return resolve_data_dir(args.data_dir, overrides)


def _load(args: argparse.Namespace, lenient: bool = False) -> Dataset:
    return load_dataset(_dataset_paths(args), lenient=lenient)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _diagnostic(exc: DetlensError) -> str:
    file = exc.details.get("file", "")
    prefix = f"{file}: " if file else ""
    return f"{prefix}{exc.code}: {exc.message}"


def _cmd_validate(args: argparse.Namespace) -> int:
    dataset = _load(args, lenient=args.lenient)
    skipped = dataset.detections.diagnostics
    for diag in skipped:
        print(_diagnostic(diag), file=sys.stderr)
    print(
        f"OK: {len(dataset.detections)} detections, "
        f"{len(dataset.vocabulary)} classes, {len(dataset.ground_truth)} ground-truth, "
        f"{len(dataset.captions)} captions"
        + (f"; skipped {len(skipped)} bad lines" if skipped else ""),
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_metrics(args: argparse.Namespace) -> int:
    dataset = _load(args)
    if args.format == "jsonl":
        lines = []
        for s in metrics.all_class_stats(dataset.detections):
            lines.append(json.dumps({
                "record": "class_stats", "class": s.class_label, "n": s.n,
                "mean_conf": s.mean_confidence, "var_conf": s.variance_confidence,
                "mean_area": s.mean_bbox_area}))
        for c in metrics.clutter_scores(dataset.detections):
            lines.append(json.dumps({
                "record": "clutter", "image_id": c.image_id, "rho": c.rho,
                "n_objects": c.n_objects, "avg_conf": c.avg_confidence}))
        _emit("".join(line + "\n" for line in lines), args.out)
    else:
        _emit(metrics.render_report_csv(dataset.detections), args.out)
    return EXIT_OK


def _profiles(dataset: Dataset) -> list[totem.PersonProfile]:
    return totem.build_profiles(dataset.captions, dataset.detections,
                                dataset.pipeline, dataset.person_images)


def _cmd_totem(args: argparse.Namespace) -> int:
    dataset = _load(args)
    profiles = _profiles(dataset)
    if args.totem_command == "graph":
        graph = totem.build_graph(profiles, args.threshold)
        text = (totem.render_node_link_json(graph) if args.format == "json"
                else totem.render_edge_list(graph))
    elif args.totem_command == "cliques":
        graph = totem.build_graph(profiles, args.threshold)
        cliques = totem.enumerate_cliques(graph, args.min_size)
        text = "".join(json.dumps({"size": len(c), "members": list(c)}) + "\n"
                       for c in cliques)
    elif args.totem_command == "similarity":
        matrix = totem.similarity_matrix(profiles)
        if args.format == "jsonl":
            text = "".join(
                json.dumps({"person_id": pid,
                            "similarities": [float(v) for v in matrix.values[i]]}) + "\n"
                for i, pid in enumerate(matrix.person_ids))
        else:
            text = totem.render_similarity_csv(matrix)
    else:
        matrix = totem.similarity_matrix(profiles)
        groups = totem.find_groups(matrix, args.similarity_threshold, args.size)
        text = "".join(
            json.dumps({"members": list(g.members),
                        "min_similarity": g.min_similarity}) + "\n"
            for g in groups)
    _emit(text, args.out)
    return EXIT_OK


def _cmd_session(args: argparse.Namespace) -> int:
    dataset = _load(args)
    log_lines = Path(args.log).read_text(encoding="utf-8").splitlines()
    events = correction.events_from_jsonl(log_lines)
    session = correction.replay(events, dataset.detections, dataset.ground_truth,
                                dataset_id=dataset.dataset_id)
    if args.session_command == "replay":
        active = len(session.effective_detections())
        print(f"replayed {len(events)} events: {active} active detections, "
              f"{len(session.added_annotations())} added annotations", file=sys.stderr)
    _emit(session.export_text(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="detlens",
                                     description="Detection introspection toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check all input files")
    _add_dataset_args(p_validate)
    p_validate.add_argument("--lenient", action="store_true",
                            help="skip bad lines and report a summary")
    p_validate.set_defaults(func=_cmd_validate)

    p_metrics = sub.add_parser("metrics", help="emit the metrics report")
    _add_dataset_args(p_metrics)
    p_metrics.add_argument("--out", help="write to file instead of stdout")
    p_metrics.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p_metrics.set_defaults(func=_cmd_metrics)

    p_totem = sub.add_parser("totem", help="object co-occurrence analyses")
    totem_sub = p_totem.add_subparsers(dest="totem_command", required=True)
    for name in ("graph", "cliques", "similarity", "groups"):
        p = totem_sub.add_parser(name)
        _add_dataset_args(p)
        p.add_argument("--out")
        if name == "graph":
            p.add_argument("--threshold", type=int, default=1,
                           help="minimum shared objects for an edge")
            p.add_argument("--format", choices=("tsv", "json"), default="tsv")
        elif name == "cliques":
            p.add_argument("--threshold", type=int, default=1)
            p.add_argument("--min-size", dest="min_size", type=int, default=2)
        elif name == "similarity":
            p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
        else:
            p.add_argument("--similarity-threshold", dest="similarity_threshold",
                           type=float, default=0.8)
            p.add_argument("--size", type=int, default=8)
        p.set_defaults(func=_cmd_totem)

    p_session = sub.add_parser("session", help="fold an event log")
    session_sub = p_session.add_subparsers(dest="session_command", required=True)
    for name in ("replay", "export"):
        p = session_sub.add_parser(name)
        _add_dataset_args(p)
        p.add_argument("--log", required=True, help="event log JSONL")
        p.add_argument("--out")
        p.set_defaults(func=_cmd_session)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DetlensError as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
