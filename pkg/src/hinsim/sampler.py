"""Positive and negative path-instance sampling in O(L) per draw.

All discrete distributions are alias tables prepared once from the count
table: a start table over first vertices (counts damped by the popularity
exponent gamma), per-(vertex, position) step tables over adjacent edges,
and per-position negative tables over all vertices.  Step tables live in
one flat arena indexed by prefix offsets, so preparation is
O((|V|+|E|)·L) time and memory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alias import AliasTable, _vose
from .counting import CountTable
from .graph import HIN, HinError
from .metapath import MetaPath, PathInstance


class SamplerError(HinError):
    pass


class ZeroInstanceError(SamplerError):
    """The meta-path has no path instances in this graph."""


@dataclass
class SamplerState:
    """Immutable sampling tables for one meta-path; shared across workers."""

    meta_path: MetaPath
    count_table: CountTable
    gamma: float
    start_table: AliasTable
    negative_tables: list  # index i-2 holds the table for position i in 2..L+1
    step_offsets: np.ndarray  # (L, n+1) prefix offsets into the arena
    step_prob: np.ndarray
    step_alias: np.ndarray  # local slot indices within each row
    step_target: np.ndarray  # dense vertex index per slot

    def step_slice(self, u: int, i: int):
        """Arena slice [lo, hi) for vertex u at 1-based position i <= L."""
        lo = int(self.step_offsets[i - 1, u])
        hi = int(self.step_offsets[i - 1, u + 1])
        return lo, hi

    def step_support(self, u: int, i: int) -> np.ndarray:
        lo, hi = self.step_slice(u, i)
        return self.step_target[lo:hi]


def build_sampler(hin: HIN, meta_path: MetaPath, counts: CountTable, gamma: float) -> SamplerState:
    """Construct all alias tables for one meta-path.

    Step tables weight each adjacent edge (u, v) at position i by
    edge_weight * C(v, i+1), which makes every instance equi-probable
    conditioned on its first vertex; gamma applies only to the start and
    negative tables.  Zero-count vertices are excluded from all supports.
    """
    if counts.meta_path is not meta_path and counts.meta_path != meta_path:
        raise SamplerError("count table was built for a different meta-path")
    n = hin.n_vertices
    L = len(meta_path)

    c1 = counts.position(1)
    start_support = np.flatnonzero(c1 > 0)
    if len(start_support) == 0:
        raise ZeroInstanceError(f"meta-path {meta_path} has no instances")
    start_table = AliasTable(start_support, c1[start_support] ** gamma)

    negative_tables = []
    for i in range(2, L + 2):
        ci = counts.position(i)
        support = np.flatnonzero(ci > 0)
        negative_tables.append(AliasTable(support, ci[support] ** gamma))

    offsets = np.zeros((L, n + 1), dtype=np.int64)
    prob_parts, alias_parts, target_parts = [], [], []
    base = 0
    for i in range(1, L + 1):
        indptr, targets, weights = hin.adjacency(meta_path.steps[i - 1])
        cur = counts.position(i)
        contrib = weights * counts.position(i + 1)[targets]
        row_sizes = np.zeros(n, dtype=np.int64)
        for u in np.flatnonzero(cur > 0):
            lo, hi = indptr[u], indptr[u + 1]
            keep = np.flatnonzero(contrib[lo:hi] > 0)
            w = contrib[lo:hi][keep]
            prob, alias = _vose(w)
            prob_parts.append(prob)
            alias_parts.append(alias)
            target_parts.append(targets[lo:hi][keep])
            row_sizes[u] = len(keep)
        offsets[i - 1, 0] = base
        offsets[i - 1, 1:] = base + np.cumsum(row_sizes)
        base = offsets[i - 1, n]

    empty_f, empty_i = np.empty(0, np.float64), np.empty(0, np.int64)
    return SamplerState(
        meta_path=meta_path,
        count_table=counts,
        gamma=gamma,
        start_table=start_table,
        negative_tables=negative_tables,
        step_offsets=offsets,
        step_prob=np.concatenate(prob_parts) if prob_parts else empty_f,
        step_alias=np.concatenate(alias_parts) if alias_parts else empty_i,
        step_target=np.concatenate(target_parts) if target_parts else empty_i,
    )


def sample_positive(state: SamplerState, rng: np.random.Generator) -> PathInstance:
    """One connected instance: start vertex ~ C(u,1)^gamma, then each step
    edge ~ edge_weight * C(next, i+1) among the current vertex's adjacency."""
    u = state.start_table.sample(rng)
    vertices = [u]
    for i in range(1, len(state.meta_path) + 1):
        lo, hi = state.step_slice(u, i)
        width = hi - lo
        j = min(int(rng.random() * width), width - 1)
        if rng.random() >= state.step_prob[lo + j]:
            j = int(state.step_alias[lo + j])
        u = int(state.step_target[lo + j])
        vertices.append(u)
    return PathInstance(state.meta_path, tuple(vertices))


def sample_negative(state: SamplerState, start: int, rng: np.random.Generator) -> PathInstance:
    """One noise sequence: first vertex fixed to ``start``, positions
    2..L+1 drawn independently ~ C(u,i)^gamma over all vertices.  The
    result is a vertex chain, not necessarily a connected path."""
    c1 = state.count_table.position(1)
    if not (0 <= start < len(c1)) or c1[start] <= 0:
        raise SamplerError(f"start vertex {start} cannot begin this meta-path")
    vertices = [start]
    vertices.extend(table.sample(rng) for table in state.negative_tables)
    return PathInstance(state.meta_path, tuple(vertices))
