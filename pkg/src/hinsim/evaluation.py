"""Grouping-label AUC for a similarity index, and a planted-community
synthetic dataset for end-to-end checks.

The AUC of a vertex u is the fraction of (same-group peer v, other-group
vertex v') pairs ranked correctly, i.e. sim(u, v) strictly greater than
sim(u, v'); ties count as wrong.  The score is the mean over labeled
vertices that have at least one peer on each side; similarity is computed
only within the labeled subset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import HIN, load_hin
from .search import SimilarityIndex


class EvalError(Exception):
    pass


@dataclass
class Grouping:
    """vertex id -> group id, over vertices of a single type."""

    labels: dict

    def __post_init__(self):
        if not self.labels:
            raise EvalError("empty grouping")

    def groups(self):
        return sorted(set(self.labels.values()))


def auc_from_similarities(sims: np.ndarray, groups: np.ndarray) -> float:
    """Ranking accuracy from a precomputed similarity matrix.

    For each vertex, the fraction of (same-group peer, other-group vertex)
    pairs with strictly greater peer similarity; ties count as wrong, a
    vertex is not its own peer, and vertices lacking a peer or a non-peer
    are skipped from the mean.
    """
    total = 0.0
    used = 0
    for a in range(len(groups)):
        same = np.flatnonzero(groups == groups[a])
        same = same[same != a]
        diff = np.flatnonzero(groups != groups[a])
        if len(same) == 0 or len(diff) == 0:
            continue
        diff_sorted = np.sort(sims[a, diff])
        wins = np.searchsorted(diff_sorted, sims[a, same], side="left").sum()
        total += wins / (len(same) * len(diff))
        used += 1
    if used == 0:
        raise EvalError("no labeled vertex has both a peer and a non-peer")
    return total / used


def auc(index: SimilarityIndex, grouping: Grouping) -> float:
    """Mean pairwise cosine-ranking accuracy over the labeled subset."""
    if len(grouping.groups()) < 2:
        raise EvalError("grouping must contain at least two groups")
    ids = list(grouping.labels)
    missing = [v for v in ids if v not in index._row]
    if missing:
        raise EvalError(f"labeled vertices missing from index: {missing[:5]}")
    rows = np.array([index._row[v] for v in ids])
    group_names = grouping.groups()
    groups = np.array([group_names.index(grouping.labels[v]) for v in ids])
    sims = index.matrix[rows] @ index.matrix[rows].T
    return auc_from_similarities(sims, groups)


@dataclass(frozen=True)
class SyntheticSpec:
    """Planted-community bibliographic network: authors write papers, each
    paper appears in one venue, venues mostly stay inside the author's
    community."""

    communities: int = 2
    authors_per_community: int = 50
    venues_per_community: int = 5
    papers_per_author: int = 4
    noise: float = 0.05
    seed: int = 0

    def __post_init__(self):
        counts = (
            self.communities,
            self.authors_per_community,
            self.venues_per_community,
            self.papers_per_author,
        )
        if any(c < 1 for c in counts):
            raise EvalError("all synthetic counts must be >= 1")
        if not (0.0 <= self.noise <= 1.0):
            raise EvalError(f"noise must be in [0, 1], got {self.noise}")


SCHEMA_LINES = [
    "vertex\tA",
    "vertex\tP",
    "vertex\tV",
    "edge\tA-P\tA\tP\tundirected",
    "edge\tP-V\tP\tV\tundirected",
]


def generate_planted_records(spec: SyntheticSpec):
    """Deterministic text records (schema, vertices, edges, labels).

    Each paper's venue stays in its author's community with probability
    1 - noise, otherwise it is drawn uniformly over all venues, so
    noise=1.0 carries no community signal at all.
    """
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    vertices, edges, labels = [], [], []
    n_venues = spec.communities * spec.venues_per_community

    for c in range(spec.communities):
        for k in range(spec.venues_per_community):
            vertices.append(f"v{c}_{k}\tV")
    for c in range(spec.communities):
        for i in range(spec.authors_per_community):
            author = f"a{c}_{i}"
            vertices.append(f"{author}\tA")
            labels.append(f"{author}\t{c}")
            for j in range(spec.papers_per_author):
                paper = f"p{c}_{i}_{j}"
                vertices.append(f"{paper}\tP")
                edges.append(f"{author}\t{paper}\tA-P")
                if rng.random() < spec.noise:
                    v = int(rng.integers(n_venues))
                    venue = f"v{v // spec.venues_per_community}_{v % spec.venues_per_community}"
                else:
                    venue = f"v{c}_{int(rng.integers(spec.venues_per_community))}"
                edges.append(f"{paper}\t{venue}\tP-V")
    return list(SCHEMA_LINES), vertices, edges, labels


def generate_planted_hin(spec: SyntheticSpec):
    """(HIN, Grouping) built from the deterministic records."""
    schema, vertices, edges, labels = generate_planted_records(spec)
    hin = load_hin(schema, edges, vertices)
    grouping = Grouping({line.split("\t")[0]: line.split("\t")[1] for line in labels})
    return hin, grouping


def load_grouping(source) -> Grouping:
    """Labels TSV: ``vertex_id<TAB>group`` with '#' comments ignored."""
    from .graph import _iter_lines

    labels = {}
    for lineno, line in _iter_lines(source):
        fields = line.split("\t")
        if len(fields) != 2:
            raise EvalError(f"labels line {lineno}: expected 'vertex_id<TAB>group'")
        labels[fields[0]] = fields[1]
    return Grouping(labels)
