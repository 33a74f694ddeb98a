"""Per-person object profiling: captions to graph to cliques to similarity.

Ten people caption their photos; a seeded subset keeps mentioning (and
photographing) the same two objects. The shared-object graph plus cosine
similarity over detection count vectors isolates that group.
"""

import random

from detlens import BBox, ClassVocabulary, Detection, DetectionSet
from detlens.ingest import CaptionDoc
from detlens.totem import (
    TokenPipelineConfig,
    build_graph,
    build_profiles,
    enumerate_cliques,
    find_groups,
    render_edge_list,
    render_similarity_csv,
    similarity_matrix,
)

rng = random.Random(11)
vocab = ClassVocabulary(["kayak", "flag", "dog", "car", "bench"])
config = TokenPipelineConfig(
    stopwords=frozenset({"a", "the", "my", "with", "and"}),
    lemma_table={"kayaks": "kayak", "flags": "flag", "dogs": "dog"})

# P0..P3 are the seeded group: kayaks and flags everywhere.
captions, detections, det_id = [], [], 0
for i in range(10):
    person = f"P{i}"
    if i < 4:
        captions.append(CaptionDoc(person, "My kayaks with the flags"))
        labels = ["kayak", "kayak", "flag"]
    else:
        other = rng.choice(["dog", "car", "bench"])
        captions.append(CaptionDoc(person, f"a {other} and the {other}"))
        labels = [other] * rng.randint(1, 3)
    for label in labels:
        detections.append(Detection(f"d{det_id}", f"{person}/photo{det_id}",
                                    label, BBox(0, 0, 10, 10), 0.9))
        det_id += 1

dataset = DetectionSet(detections, vocab)
profiles = build_profiles(captions, dataset, config)

print("== profiles (object tokens from captions, counts from detections) ==")
for p in profiles:
    print(f"  {p.person_id}: tokens={sorted(p.object_tokens)} counts={p.count_vector}")

print("\n== shared-object graph (threshold: 1 common object) ==")
graph = build_graph(profiles, threshold=1)
print("  " + "  ".join(render_edge_list(graph).splitlines()))

print("\n== maximal cliques of size >= 3 ==")
for clique in enumerate_cliques(graph, min_size=3):
    print(f"  {clique}")

print("\n== cosine similarity matrix (first rows) ==")
matrix = similarity_matrix(profiles)
for line in render_similarity_csv(matrix).splitlines()[:5]:
    print(" ", line)

print("\n== groups at similarity >= 0.9, size >= 4 ==")
for group in find_groups(matrix, 0.9, group_size=4):
    print(f"  members={group.members} weakest pair={group.min_similarity:.3f}")
