"""Per-position path-instance counts via backward dynamic programming.

For a length-L meta-path, counts[i-1][u] holds the (weighted) number of
instances of the suffix steps i..L that start at vertex u; position L+1 is
the boundary (1 for any vertex that can terminate the final step, else 0).
Position 1 therefore counts full instances per starting vertex.  One
backward sweep touches every edge of each step once, O((|V|+|E|)·L).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import HIN
from .metapath import MetaPath


@dataclass
class CountTable:
    meta_path: MetaPath
    counts: np.ndarray  # shape (L+1, n_vertices), row i-1 = position i
    edge_visits: int  # adjacency entries touched while building

    def position(self, i: int) -> np.ndarray:
        """Counts for 1-based position i in 1..L+1."""
        L = len(self.meta_path)
        if not (1 <= i <= L + 1):
            raise IndexError(f"position {i} out of range 1..{L + 1}")
        return self.counts[i - 1]

    def at(self, u: int, i: int) -> float:
        return float(self.position(i)[u])

    def total_instances(self) -> float:
        return float(self.counts[0].sum())


def precompute_counts(hin: HIN, meta_path: MetaPath) -> CountTable:
    """Backward DP over the meta-path's steps.

    Boundary: position L+1 is 1 exactly for vertices with an incoming
    final-step edge.  Recursion: position i sums weight * position-(i+1)
    count over each vertex's step-i adjacency entries, so parallel edges
    multiply counts and edge weights generalize counts to weighted sums.
    """
    n = hin.n_vertices
    L = len(meta_path)
    counts = np.zeros((L + 1, n), dtype=np.float64)

    last = meta_path.steps[-1]
    _, targets, _ = hin.adjacency(last)
    counts[L][np.unique(targets)] = 1.0
    visits = len(targets)

    for i in range(L - 1, -1, -1):
        mat = hin.sparse_matrix(meta_path.steps[i])
        counts[i] = mat @ counts[i + 1]
        visits += mat.nnz
    return CountTable(meta_path, counts, visits)


def dump_counts_tsv(table: CountTable, hin: HIN, stream) -> None:
    """Write ``vertex<TAB>position<TAB>count`` rows for every (u, i)."""
    L = len(table.meta_path)
    for i in range(1, L + 2):
        row = table.position(i)
        for u in range(hin.n_vertices):
            stream.write(f"{hin.vertex_id(u)}\t{i}\t{row[u]:.17g}\n")
