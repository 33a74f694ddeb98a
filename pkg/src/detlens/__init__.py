"""Introspection and correction toolkit for object-detection model outputs."""

from .correction import (
    ClassProportion,
    CorrectionEvent,
    MappingReport,
    ProjectionSnapshot,
    Session,
    class_proportions,
    events_from_jsonl,
    events_to_jsonl,
    replay,
)
from .ingest import (
    BBox,
    CaptionDoc,
    ClassVocabulary,
    Detection,
    DetectionSet,
    GroundTruthAnnotation,
    iou,
    parse_captions,
    parse_detections,
    parse_ground_truth,
    parse_vocabulary,
    serialize_detections,
    serialize_ground_truth,
)
from .metrics import (
    ClassStats,
    ClutterScore,
    CorrelationReport,
    class_stats,
    clutter_confidence_series,
    clutter_density,
    confidence_size_correlation,
    flag_outliers,
    pearson_r,
)
from .store import Dataset, FileStore, load_dataset
from .totem import (
    CooccurrenceGraph,
    Group,
    PersonProfile,
    SimilarityMatrix,
    TokenPipelineConfig,
    build_graph,
    build_profiles,
    cosine,
    enumerate_cliques,
    find_groups,
    object_tokens,
    preprocess,
    similarity_matrix,
)

__version__ = "0.1.0"
