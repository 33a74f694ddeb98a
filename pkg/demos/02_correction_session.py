"""A correction session end to end: triage, eliminate, re-annotate, revert,
export.

The projection series shows how the class's confidence profile moves as the
user removes false positives; a revert undoes its target without losing the
audit trail, and the export round-trips through the ground-truth format.
"""

from detlens import BBox, ClassVocabulary, Detection, DetectionSet, Session
from detlens.correction import class_proportions
from detlens.ingest import GroundTruthAnnotation, parse_ground_truth

vocab = ClassVocabulary(["person", "dog"])
dataset = DetectionSet([
    Detection("d1", "img1", "dog", BBox(0, 0, 10, 10), 0.9),
    Detection("d2", "img1", "dog", BBox(20, 20, 40, 40), 0.8),
    Detection("d3", "img2", "dog", BBox(5, 5, 15, 15), 0.2),
    Detection("p1", "img2", "person", BBox(0, 0, 50, 80), 0.6),
], vocab)
ground_truth = [GroundTruthAnnotation("img1", "dog", BBox(0, 0, 10, 10))]

print("== which classes deserve attention? ==")
for p in class_proportions(dataset):
    print(f"  {p.class_label}: in {p.image_count} images "
          f"({p.proportion:.0%} of the dataset)")

session = Session(dataset, ground_truth)

def show_series(label):
    for snap in session.projection_series(label):
        tag = "baseline" if snap.after_event < 0 else f"after e{snap.after_event}"
        if snap.empty:
            print(f"  {tag:10s}: class emptied")
        else:
            print(f"  {tag:10s}: n={snap.n_remaining} "
                  f"mean={snap.mean_confidence:.4f} var={snap.variance_confidence:.4f}")

print("\n== eliminate the low-confidence dog ==")
session.eliminate_false_positives(["d3"], actor="demo")
show_series("dog")

print("\n== tighten a box and add a missed person ==")
session.reannotate_bbox("d1", BBox(1, 1, 9, 9), actor="demo")
session.add_false_negative("img1", "person", BBox(30, 0, 45, 30), actor="demo")
print(f"  effective bbox of d1: {session.effective_bbox('d1').as_list()}")
print(f"  effective ground truth: {len(session.effective_ground_truth())} annotations")

print("\n== ground truth vs predictions on img1 ==")
report = session.gt_prediction_mapping("img1")
for m in report.matches:
    print(f"  match: gt#{m.gt_index} <-> {m.detection_id} (IoU {m.iou:.2f})")
print(f"  false negatives (unmatched gt): {list(report.unmatched_gt)}")
print(f"  candidate false positives:      {list(report.unmatched_predictions)}")

print("\n== revert the elimination; the log keeps everything ==")
session.revert(0, actor="demo")
show_series("dog")
print(f"  events in log: {[e.kind for e in session.events]}")

print("\n== export and re-ingest ==")
text = session.export_text()
print("  " + "\n  ".join(text.splitlines()[:4]))
reparsed = parse_ground_truth(text.splitlines(), vocab)
print(f"  re-parsed {len(reparsed)} annotations, round-trip intact")
