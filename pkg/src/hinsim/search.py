"""Cosine similarity search over unit-normalized embeddings.

Rankings are exact: a bounded selection heap scans all candidates with a
composite (-similarity, vertex id) key, so ties break by ascending id and
results match a full sort.
"""

from __future__ import annotations

import heapq

import numpy as np


class SearchError(Exception):
    pass


def cosine(x, y) -> float:
    """x . y / (|x| |y|); errors on zero-norm input."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise SearchError("cosine undefined for zero-norm vectors")
    return float(x @ y / (nx * ny))


class SimilarityIndex:
    """Unit-normalized embedding matrix with id and type lookups.

    Zero-norm vectors cannot be ranked; they are excluded and recorded in
    ``excluded``.  Immutable after construction; concurrent queries are safe.
    """

    def __init__(self, ids, matrix, types=None):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or len(ids) != matrix.shape[0]:
            raise SearchError("need one embedding row per vertex id")
        norms = np.linalg.norm(matrix, axis=1)
        keep = norms > 0
        self.excluded = [vid for vid, ok in zip(ids, keep) if not ok]
        self.ids = [vid for vid, ok in zip(ids, keep) if ok]
        self.matrix = matrix[keep] / norms[keep, None]
        self._row = {vid: i for i, vid in enumerate(self.ids)}
        if types is None:
            self.types = None
        else:
            if set(types) < set(self.ids):
                missing = sorted(set(self.ids) - set(types))[:5]
                raise SearchError(f"missing vertex types for {missing}...")
            self.types = [types[vid] for vid in self.ids]

    def __len__(self):
        return len(self.ids)

    def vector(self, vertex_id: str) -> np.ndarray:
        try:
            return self.matrix[self._row[vertex_id]]
        except KeyError:
            raise SearchError(f"vertex {vertex_id!r} is not indexed") from None

    def similarities(self, vertex_id: str) -> np.ndarray:
        """Cosine of the query against every indexed vertex (itself included)."""
        return self.matrix @ self.vector(vertex_id)


def top_k(index: SimilarityIndex, query: str, k: int, type_filter=None):
    """The k most similar vertices, descending, query excluded.

    Ties break by ascending vertex id; with a type filter only vertices of
    that type are candidates.  Returns min(k, candidates) (id, similarity)
    pairs.
    """
    if k < 1:
        raise SearchError(f"k must be >= 1, got {k}")
    if type_filter is not None and index.types is None:
        raise SearchError("index has no vertex types; cannot filter by type")
    sims = index.similarities(query)
    qrow = index._row[query]

    def candidates():
        for i, vid in enumerate(index.ids):
            if i == qrow:
                continue
            if type_filter is not None and index.types[i] != type_filter:
                continue
            yield (-sims[i], vid)

    best = heapq.nsmallest(k, candidates())
    return [(vid, float(-neg)) for neg, vid in best]
