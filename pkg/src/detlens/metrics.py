"""Detection-quality metrics.

Per-class confidence statistics against bounding-box size, per-image clutter
density (object count over the pixel extent spanned by all box corners),
Pearson correlations between the two families, and residual-based outlier
flagging on any scatter.

Conventions, also recorded in the CSV report header:
  - variance uses the sample (n-1) denominator and reports 0.0 for n=1;
  - an undefined Pearson correlation (constant series) is a null with a
    reason, never a NaN;
  - outliers are points whose leave-one-out (externally) studentized
    residual against a least-squares line exceeds 2.5 in absolute value.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateExtent,
    InsufficientClasses,
    InsufficientImages,
    MixedImages,
    NoSuchClass,
    TooFewPoints,
)
from .ingest import Detection, DetectionSet

OUTLIER_RESIDUAL_CUTOFF = 2.5
REASON_CONSTANT_SERIES = "constant_series"


@dataclass(frozen=True)
class ClassStats:
    class_label: str
    n: int
    mean_confidence: float
    variance_confidence: float
    mean_bbox_area: float


@dataclass(frozen=True)
class ClutterScore:
    image_id: str
    rho: float
    n_objects: int
    avg_confidence: float


@dataclass(frozen=True)
class CorrelationReport:
    """Scatter of (x, y) points with ids, Pearson r, and flagged outliers.

    ``pearson_r`` is None when the correlation is undefined; the reason is
    then in ``undefined_reason``.
    """

    points: tuple[tuple[float, float], ...]
    point_ids: tuple[str, ...]
    pearson_r: float | None
    outlier_ids: tuple[str, ...]
    undefined_reason: str | None = None


def _mean(values: Sequence[float]) -> float:
    return float(sum(values) / len(values))


def _sample_variance(values: Sequence[float], mean: float) -> float:
    if len(values) < 2:
        return 0.0
    return float(sum((v - mean) ** 2 for v in values) / (len(values) - 1))


def class_stats(detections: DetectionSet, class_label: str) -> ClassStats:
    """Confidence mean/variance and mean box area over one class."""
    members = detections.for_class(class_label)
    if not members:
        raise NoSuchClass(f"no detections with class {class_label!r}")
    confidences = [d.confidence for d in members]
    mean_conf = _mean(confidences)
    return ClassStats(
        class_label=class_label,
        n=len(members),
        mean_confidence=mean_conf,
        variance_confidence=_sample_variance(confidences, mean_conf),
        mean_bbox_area=_mean([d.bbox.area for d in members]),
    )


def all_class_stats(detections: DetectionSet) -> list[ClassStats]:
    """ClassStats for every class present, ordered by label."""
    return [class_stats(detections, label)
            for label in sorted(detections.classes_present())]


def clutter_density(image_detections: Sequence[Detection]) -> ClutterScore:
    """Objects per pixel^2 of the extent spanned by all box corners.

    Both corners of every box contribute to the coordinate extent, so the
    measure is translation invariant and scales as 1/s^2 under uniform
    coordinate scaling by s.
    """
    if not image_detections:
        raise MixedImages("empty detection list")
    image_ids = {d.image_id for d in image_detections}
    if len(image_ids) != 1:
        raise MixedImages(f"detections span several images: {sorted(image_ids)}")
    xcoords = [v for d in image_detections for v in (d.bbox.x1, d.bbox.x2)]
    ycoords = [v for d in image_detections for v in (d.bbox.y1, d.bbox.y2)]
    extent = (max(xcoords) - min(xcoords)) * (max(ycoords) - min(ycoords))
    if extent <= 0:
        raise DegenerateExtent("bounding boxes span a zero-area extent")
    return ClutterScore(
        image_id=next(iter(image_ids)),
        rho=len(image_detections) / extent,
        n_objects=len(image_detections),
        avg_confidence=_mean([d.confidence for d in image_detections]),
    )


def clutter_scores(detections: DetectionSet) -> list[ClutterScore]:
    """ClutterScore for every image, ordered by image id."""
    return [clutter_density(detections.for_image(image_id))
            for image_id in sorted(detections.image_ids())]


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Pearson correlation coefficient; None when either series is constant."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt(np.dot(dx, dx)))
    sy = float(np.sqrt(np.dot(dy, dy)))
    if sx == 0.0 or sy == 0.0:
        return None
    r = float(np.dot(dx, dy) / (sx * sy))
    return max(-1.0, min(1.0, r))


def _correlation_report(points: list[tuple[float, float]], ids: list[str]) -> CorrelationReport:
    r = pearson_r([p[0] for p in points], [p[1] for p in points]) if len(points) >= 2 else None
    outliers: tuple[str, ...] = ()
    if len(points) >= 3:
        outliers = tuple(sorted(ids[i] for i in flag_outliers(points)))
    return CorrelationReport(
        points=tuple(points),
        point_ids=tuple(ids),
        pearson_r=r,
        outlier_ids=outliers,
        undefined_reason=None if r is not None else REASON_CONSTANT_SERIES,
    )


def confidence_size_correlation(detections: DetectionSet) -> CorrelationReport:
    """One point per class: (mean bbox area, mean confidence)."""
    stats = all_class_stats(detections)
    if len(stats) < 2:
        raise InsufficientClasses(f"need >=2 classes, have {len(stats)}")
    points = [(s.mean_bbox_area, s.mean_confidence) for s in stats]
    return _correlation_report(points, [s.class_label for s in stats])


def clutter_confidence_series(detections: DetectionSet) -> CorrelationReport:
    """One point per image: (clutter density, average confidence)."""
    scores = clutter_scores(detections)
    if len(scores) < 2:
        raise InsufficientImages(f"need >=2 images, have {len(scores)}")
    points = [(s.rho, s.avg_confidence) for s in scores]
    return _correlation_report(points, [s.image_id for s in scores])


def flag_outliers(points: Sequence[tuple[float, float]]) -> list[int]:
    """Indices of points far off the least-squares line y = a + b*x.

    A point is flagged when its externally studentized residual (the
    residual scaled by a fit that excludes the point itself) exceeds 2.5 in
    absolute value. Plain z-scored residuals are bounded near 2 for small n
    and can never reach that cutoff, so the leave-one-out form is used.
    """
    n = len(points)
    if n < 3:
        raise TooFewPoints(f"need >=3 points, have {n}")
    if n < 4:
        # Deleting a point from 3 leaves a zero-residual fit, so every
        # off-line point would studentize to infinity; no meaningful flags.
        return []
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    design = np.column_stack([np.ones(n), x])
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    sse = float(resid @ resid)
    scale = max(1.0, float(np.abs(y).max()))
    if sse <= (1e-12 * scale) ** 2 * n:
        return []
    # Hat-matrix diagonal; for a constant x column fall back to uniform leverage.
    sxx = float(((x - x.mean()) ** 2).sum())
    if sxx == 0.0:
        leverage = np.full(n, 1.0 / n)
    else:
        leverage = 1.0 / n + (x - x.mean()) ** 2 / sxx
    flagged = []
    for i in range(n):
        e = float(resid[i])
        denom = sse * (1.0 - leverage[i]) - e * e
        if abs(e) <= 1e-12 * scale:
            continue
        if denom <= 1e-12 * sse + 1e-30:
            # The point carries essentially all the error: infinitely studentized.
            flagged.append(i)
            continue
        t = e * math.sqrt(max(n - 3, 0) / denom)
        if abs(t) > OUTLIER_RESIDUAL_CUTOFF:
            flagged.append(i)
    return flagged


def _csv_num(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def render_report_csv(detections: DetectionSet) -> str:
    """The full metrics report as sectioned CSV text.

    Deterministic: class stats ordered by label, clutter scores by image id,
    outliers lexicographically. The CLI writes this text verbatim and the
    HTTP report endpoint serves the same bytes.
    """
    out = io.StringIO()
    out.write("# metrics report\n")
    out.write("# variance: sample (n-1), 0 for n=1\n")
    out.write("# class_stats\n")
    out.write("class,n,mean_conf,var_conf,mean_area\n")
    for s in all_class_stats(detections):
        out.write(f"{s.class_label},{s.n},{_csv_num(s.mean_confidence)},"
                  f"{_csv_num(s.variance_confidence)},{_csv_num(s.mean_bbox_area)}\n")
    out.write("# clutter\n")
    out.write("image_id,rho,n_objects,avg_conf\n")
    for c in clutter_scores(detections):
        out.write(f"{c.image_id},{_csv_num(c.rho)},{c.n_objects},{_csv_num(c.avg_confidence)}\n")
    for name, builder, guard in (
        ("confidence_size", confidence_size_correlation, InsufficientClasses),
        ("clutter_confidence", clutter_confidence_series, InsufficientImages),
    ):
        out.write(f"# correlation_{name}\n")
        out.write("pearson_r,n_points,undefined_reason,outliers\n")
        try:
            report = builder(detections)
        except guard as exc:
            out.write(f",0,{exc.code},\n")
            continue
        out.write(f"{_csv_num(report.pearson_r)},{len(report.points)},"
                  f"{report.undefined_reason or ''},{';'.join(report.outlier_ids)}\n")
    return out.getvalue()
