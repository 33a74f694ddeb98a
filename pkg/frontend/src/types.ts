/** Shapes of the HTTP service's JSON payloads. */

export type BBoxArray = [number, number, number, number];

export interface DetectionRecord {
  id: string;
  image_id: string;
  class: string;
  bbox: BBoxArray;
  confidence: number;
}

export interface DetectionPage {
  total: number;
  limit: number;
  offset: number;
  detections: DetectionRecord[];
}

export interface ClassEntry {
  class: string;
  n_detections: number;
  n_images: number;
}

export interface ClassProportion {
  class: string;
  image_count: number;
  proportion: number;
}

export interface ProjectionSnapshot {
  class: string;
  after_event: number;
  n_remaining: number;
  mean_confidence: number | null;
  variance_confidence: number | null;
  empty: boolean;
}

export interface SessionInfo {
  session_id: string;
  dataset_id: string;
  created_at: string;
  n_events: number;
  events: CorrectionEvent[];
}

export type EventKind =
  | "eliminate_fp"
  | "reannotate_bbox"
  | "add_false_negative"
  | "revert";

export interface CorrectionEvent {
  index: number;
  kind: EventKind;
  payload: Record<string, unknown>;
  actor: string;
  at: string;
}

export interface MappingReport {
  image_id: string;
  ground_truth: { gt_index: number; class: string; bbox: BBoxArray; source: string }[];
  matches: { class: string; gt_index: number; detection_id: string; iou: number }[];
  unmatched_gt: number[];
  unmatched_predictions: string[];
}

export interface GraphDoc {
  threshold: number;
  nodes: { id: string }[];
  links: { source: string; target: string; weight: number }[];
}

export interface SimilarityDoc {
  person_ids: string[];
  values: number[][];
  degenerate_ids: string[];
}

export interface GroupDoc {
  members: string[];
  min_similarity: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
