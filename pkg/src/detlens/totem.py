"""Per-person object profiling: shared-object graph, cliques, similarity.

Captions run through a small text pipeline (lowercase tokenization, stop
word removal, table-driven lemmatization) and are filtered against the
class vocabulary to form each person's object-token set. Detection labels
give each person a count vector over the vocabulary. People connect in a
graph when they share enough object tokens; maximal cliques and cosine
similarities over the count vectors surface candidate groups.
"""

from __future__ import annotations

import io
import json
import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidLemmaTable, LengthMismatch, TooFewProfiles
from .ingest import CaptionDoc, ClassVocabulary, DetectionSet

_TOKEN_RE = re.compile(r"[^0-9a-z]+")


@dataclass(frozen=True)
class TokenPipelineConfig:
    """Stop words plus a token->lemma lookup with identity fallback.

    The lemma table must be idempotent-closed: applying it twice changes
    nothing. Checked at construction so pipeline output is stable.
    """

    stopwords: frozenset[str] = frozenset()
    lemma_table: Mapping[str, str] = None  # type: ignore[assignment]

    def __post_init__(self):
        table = dict(self.lemma_table or {})
        object.__setattr__(self, "lemma_table", table)
        for token, lemma in table.items():
            if table.get(lemma, lemma) != lemma:
                raise InvalidLemmaTable(
                    f"lemma {lemma!r} (from {token!r}) maps on to {table[lemma]!r}")
            if not lemma or _TOKEN_RE.search(lemma):
                raise InvalidLemmaTable(
                    f"lemma {lemma!r} is not a single lowercase token")


@dataclass(frozen=True)
class PersonProfile:
    """A person's caption-derived object tokens and detection count vector."""

    person_id: str
    object_tokens: frozenset[str]
    count_vector: tuple[int, ...]


@dataclass(frozen=True)
class Group:
    members: tuple[str, ...]
    min_similarity: float


class CooccurrenceGraph:
    """People as nodes; an edge wherever two share >= threshold object tokens."""

    def __init__(self, nodes: Sequence[str], edges: Mapping[tuple[str, str], int],
                 threshold: int):
        self.nodes = tuple(nodes)
        if any(u == v for u, v in edges):
            raise ValueError("self-loops are not allowed")
        self.edges = {tuple(sorted(pair)): weight for pair, weight in edges.items()}
        self.threshold = threshold
        self._adjacency: dict[str, set[str]] = {node: set() for node in self.nodes}
        for (u, v) in self.edges:
            self._adjacency[u].add(v)
            self._adjacency[v].add(u)

    def neighbors(self, node: str) -> set[str]:
        return self._adjacency[node]

    def weight(self, u: str, v: str) -> int | None:
        return self.edges.get(tuple(sorted((u, v))))


class SimilarityMatrix:
    """Symmetric pairwise cosine matrix over person count vectors."""

    def __init__(self, person_ids: Sequence[str], values: np.ndarray,
                 degenerate_ids: Iterable[str] = ()):
        self.person_ids = tuple(person_ids)
        self.values = values
        self.degenerate_ids = frozenset(degenerate_ids)

    def similarity(self, u: str, v: str) -> float:
        i = self.person_ids.index(u)
        j = self.person_ids.index(v)
        return float(self.values[i, j])


def preprocess(text: str, config: TokenPipelineConfig) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop stop words, lemmatize.

    Order is preserved and duplicates are retained; an idempotent-closed
    lemma table makes the whole pipeline idempotent on its own output.
    """
    tokens = [t for t in _TOKEN_RE.split(text.lower()) if t]
    kept = [t for t in tokens if t not in config.stopwords]
    return [config.lemma_table.get(t, t) for t in kept]


def object_tokens(tokens: Iterable[str], vocabulary: ClassVocabulary) -> frozenset[str]:
    """Distinct tokens that name a vocabulary class."""
    return frozenset(t for t in tokens if t in vocabulary)


def load_stopwords(stream: Iterable[str]) -> frozenset[str]:
    """One token per line; blank lines ignored."""
    return frozenset(line.strip() for line in stream if line.strip())


def load_lemma_table(stream: Iterable[str]) -> dict[str, str]:
    """Two tab-separated columns token<TAB>lemma; closure checked downstream."""
    table: dict[str, str] = {}
    for line_no, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise InvalidLemmaTable(f"line {line_no}: expected token<TAB>lemma")
        table[parts[0]] = parts[1]
    return table


def default_person_images(person_ids: Sequence[str],
                          detections: DetectionSet) -> dict[str, frozenset[str]]:
    """Fallback person->images rule: image ids equal to or prefixed by the person id."""
    mapping = {}
    image_ids = detections.image_ids()
    for person_id in person_ids:
        prefix = person_id + "/"
        mapping[person_id] = frozenset(
            i for i in image_ids if i == person_id or i.startswith(prefix))
    return mapping


def build_profiles(captions: Sequence[CaptionDoc], detections: DetectionSet,
                   config: TokenPipelineConfig,
                   person_images: Mapping[str, frozenset[str]] | None = None,
                   ) -> list[PersonProfile]:
    """One profile per person, in order of first appearance in the captions.

    Object tokens come from the person's captions; count vectors count the
    person's detection labels on the vocabulary axes. ``person_images``
    assigns detections to people; without it, image ids are expected to be
    the person id or start with ``<person_id>/``.
    """
    vocabulary = detections.vocabulary
    person_ids = list(dict.fromkeys(c.person_id for c in captions))
    if person_images is None:
        person_images = default_person_images(person_ids, detections)

    tokens_by_person: dict[str, set[str]] = {p: set() for p in person_ids}
    for caption in captions:
        tokens_by_person[caption.person_id].update(
            object_tokens(preprocess(caption.text, config), vocabulary))

    counts_by_image: dict[str, np.ndarray] = {}
    for det in detections:
        vec = counts_by_image.get(det.image_id)
        if vec is None:
            vec = counts_by_image[det.image_id] = np.zeros(len(vocabulary), dtype=int)
        vec[vocabulary.index(det.class_label)] += 1

    profiles = []
    for person_id in person_ids:
        vec = np.zeros(len(vocabulary), dtype=int)
        for image_id in person_images.get(person_id, ()):
            if image_id in counts_by_image:
                vec += counts_by_image[image_id]
        profiles.append(PersonProfile(
            person_id=person_id,
            object_tokens=frozenset(tokens_by_person[person_id]),
            count_vector=tuple(int(v) for v in vec),
        ))
    return profiles


def build_graph(profiles: Sequence[PersonProfile], threshold: int = 1) -> CooccurrenceGraph:
    """Connect two people when they share at least ``threshold`` object tokens."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    nodes = [p.person_id for p in profiles]
    edges: dict[tuple[str, str], int] = {}
    for i, a in enumerate(profiles):
        for b in profiles[i + 1:]:
            weight = len(a.object_tokens & b.object_tokens)
            if weight >= threshold:
                edges[tuple(sorted((a.person_id, b.person_id)))] = weight
    return CooccurrenceGraph(nodes, edges, threshold)


def _bron_kerbosch(adjacency: Mapping[str, set[str]], clique: set[str],
                   candidates: set[str], excluded: set[str],
                   out: list[frozenset[str]]) -> None:
    # Pivot on the vertex with most candidate neighbors to prune branches.
    if not candidates and not excluded:
        out.append(frozenset(clique))
        return
    pivot = max(candidates | excluded, key=lambda u: len(adjacency[u] & candidates))
    for v in list(candidates - adjacency[pivot]):
        _bron_kerbosch(adjacency, clique | {v},
                       candidates & adjacency[v], excluded & adjacency[v], out)
        candidates.remove(v)
        excluded.add(v)


def enumerate_cliques(graph: CooccurrenceGraph, min_size: int = 2) -> list[tuple[str, ...]]:
    """All maximal cliques of at least ``min_size`` members.

    Members are sorted within each clique; cliques are ordered largest
    first, ties lexicographically.
    """
    if min_size < 2:
        raise ValueError("min_size must be >= 2")
    found: list[frozenset[str]] = []
    _bron_kerbosch(graph._adjacency, set(), set(graph.nodes), set(), found)
    cliques = [tuple(sorted(c)) for c in found if len(c) >= min_size]
    cliques.sort(key=lambda c: (-len(c), c))
    return cliques


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine similarity of two non-negative vectors; 0.0 when either is all-zero."""
    if len(u) != len(v):
        raise LengthMismatch(f"vector lengths differ: {len(u)} vs {len(v)}")
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if all(x == y for x, y in zip(u, v)):
        return 1.0
    value = sum(x * y for x, y in zip(u, v)) / (nu * nv)
    return min(1.0, value)


def similarity_matrix(profiles: Sequence[PersonProfile]) -> SimilarityMatrix:
    """Full pairwise cosine matrix over count vectors, in profile order.

    Each pair is computed once and mirrored, so the matrix is exactly
    symmetric; all-zero count vectors are flagged degenerate and score 0
    against everyone, themselves included.
    """
    if len(profiles) < 2:
        raise TooFewProfiles(f"need >=2 profiles, have {len(profiles)}")
    n = len(profiles)
    values = np.zeros((n, n))
    for i in range(n):
        u = profiles[i].count_vector
        values[i, i] = cosine(u, u)
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = cosine(u, profiles[j].count_vector)
    degenerate = [p.person_id for p in profiles if not any(p.count_vector)]
    return SimilarityMatrix([p.person_id for p in profiles], values, degenerate)


def find_groups(matrix: SimilarityMatrix, similarity_threshold: float,
                group_size: int = 8) -> list[Group]:
    """Maximal cliques of people whose pairwise similarity clears the threshold.

    Each group carries its weakest internal similarity so callers can rank
    candidate groups.
    """
    if not 0.0 < similarity_threshold <= 1.0:
        raise ValueError("similarity_threshold must be in (0, 1]")
    if group_size < 2:
        raise ValueError("group_size must be >= 2")
    ids = matrix.person_ids
    edges: dict[tuple[str, str], int] = {}
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            if matrix.values[i, j] >= similarity_threshold:
                edges[tuple(sorted((ids[i], ids[j])))] = 1
    graph = CooccurrenceGraph(ids, edges, 1)
    index = {p: i for i, p in enumerate(ids)}
    groups = []
    for clique in enumerate_cliques(graph, min_size=group_size):
        pairwise = [float(matrix.values[index[u], index[v]])
                    for a, u in enumerate(clique) for v in clique[a + 1:]]
        groups.append(Group(members=clique, min_similarity=min(pairwise)))
    return groups


# -- exports ---------------------------------------------------------------


def render_similarity_csv(matrix: SimilarityMatrix) -> str:
    """CSV with person ids on the first row and column, values to 6 decimals."""
    out = io.StringIO()
    out.write("person_id," + ",".join(matrix.person_ids) + "\n")
    for i, person_id in enumerate(matrix.person_ids):
        row = ",".join(f"{float(matrix.values[i, j]):.6f}"
                       for j in range(len(matrix.person_ids)))
        out.write(f"{person_id},{row}\n")
    return out.getvalue()


def render_edge_list(graph: CooccurrenceGraph) -> str:
    """Tab-separated ``u v weight`` lines, sorted by pair."""
    lines = [f"{u}\t{v}\t{w}" for (u, v), w in sorted(graph.edges.items())]
    return "".join(line + "\n" for line in lines)


def graph_node_link(graph: CooccurrenceGraph) -> dict:
    """Node-link structure for graph-drawing frontends."""
    return {
        "threshold": graph.threshold,
        "nodes": [{"id": node} for node in graph.nodes],
        "links": [{"source": u, "target": v, "weight": w}
                  for (u, v), w in sorted(graph.edges.items())],
    }


def render_node_link_json(graph: CooccurrenceGraph) -> str:
    return json.dumps(graph_node_link(graph), indent=2) + "\n"
