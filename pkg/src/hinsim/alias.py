"""Constant-time weighted discrete sampling via Walker's alias method.

A table is built in O(n) from non-negative weights (Vose's variant) and
each draw costs two uniforms regardless of support size.
"""

from __future__ import annotations

import numpy as np


class AliasTableError(ValueError):
    pass


def _vose(weights: np.ndarray):
    """(prob, alias) arrays such that drawing a slot j uniformly and
    accepting it with probability prob[j] (else taking alias[j]) samples
    slot i with probability weights[i] / weights.sum()."""
    n = len(weights)
    scaled = weights * (n / weights.sum())
    prob = np.ones(n, dtype=np.float64)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    # leftovers in either stack are 1 up to rounding
    return prob, alias


class AliasTable:
    """Sampler over an explicit support with fixed weights.

    Zero-weight outcomes are legal in the construction and are never
    returned; the weight total must be positive.
    """

    def __init__(self, support, weights):
        support = np.asarray(support, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.float64)
        if support.shape != weights.shape or support.ndim != 1:
            raise AliasTableError("support and weights must be 1-d and the same length")
        if len(support) == 0:
            raise AliasTableError("empty support")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise AliasTableError("weights must be finite and non-negative")
        total = weights.sum()
        if not total > 0:
            raise AliasTableError("weights must have positive sum")
        self.support = support
        self.weights = weights
        self.prob, self.alias = _vose(weights)

    def __len__(self):
        return len(self.support)

    def sample(self, rng: np.random.Generator) -> int:
        """One outcome id in O(1)."""
        n = len(self.support)
        j = min(int(rng.random() * n), n - 1)
        if rng.random() >= self.prob[j]:
            j = self.alias[j]
        return int(self.support[j])

    def sample_many(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Vectorized draws; same distribution as :meth:`sample`."""
        n = len(self.support)
        j = np.minimum((rng.random(count) * n).astype(np.int64), n - 1)
        reject = rng.random(count) >= self.prob[j]
        j[reject] = self.alias[j[reject]]
        return self.support[j]


def sample_alias(table: AliasTable, rng: np.random.Generator) -> int:
    """Draw one outcome from a table; O(1) per draw."""
    return table.sample(rng)
