"""Relevance scores, negative-sampling losses, gradients, and persistence.

The score of an ordered vertex pair under a sub-meta-path key is

    f(u, v) = mu + p . x_u + q . x_v + x_u . x_v

with one global bias mu and two local bias vectors (p, q) per canonical
sub-meta-path, plus one embedding vector per vertex.  A path instance is
scored by summing f over consecutive edges (sequential mode) or over all
position pairs i <= j keyed by their sub-meta-path (pairwise mode); the
training losses are -log sigmoid(score) for observed instances and
-log(1 - sigmoid(score)) for noise sequences.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .graph import HIN
from .metapath import MetaPath, MetaPathError, PathInstance

MODES = ("seq", "pair")
LABELS = ("positive", "negative")


class ModelError(Exception):
    pass


class NumericFault(ModelError):
    """A gradient or update became non-finite."""


def _softplus(x: float) -> float:
    # log(1 + e^x) without overflow on either tail
    return float(np.logaddexp(0.0, x))


class GradientSet:
    """Sparse parameter deltas keyed by ("x", vertex), ("mu"|"p"|"q", key_id)."""

    def __init__(self):
        self.entries: dict = {}

    def add(self, key, delta):
        if key in self.entries:
            self.entries[key] = self.entries[key] + delta
        else:
            self.entries[key] = delta

    def __len__(self):
        return len(self.entries)

    def items(self):
        return self.entries.items()


def sub_path_keys(meta_path: MetaPath, mode: str):
    """Canonical keys of every sub-meta-path the mode scores, in (i, j) order."""
    if mode not in MODES:
        raise ModelError(f"mode must be one of {MODES}, got {mode!r}")
    names = meta_path.key()
    L = len(meta_path)
    out = []
    for i in range(1, L + 1):
        js = range(i, L + 1) if mode == "pair" else (i,)
        for j in js:
            out.append(((i, j), names[i - 1 : j]))
    return out


class ModelParameters:
    """Shared mutable parameter arena: embeddings plus per-key biases.

    Identical edge-type name sequences arising from different meta-paths
    share one (mu, p, q) record.  With ``symmetric=True`` the p and q rows
    are the same storage, making every score orientation-symmetric.
    """

    def __init__(self, vertex_ids, d, key_order, symmetric, rng):
        self.vertex_ids = list(vertex_ids)
        self.d = int(d)
        self.symmetric = bool(symmetric)
        self.key_index: dict[tuple[str, ...], int] = {k: i for i, k in enumerate(key_order)}
        n, K = len(self.vertex_ids), len(self.key_index)
        if len(self.key_index) != len(key_order):
            raise ModelError("duplicate sub-meta-path keys")
        self.embeddings = rng.uniform(-1.0, 1.0, size=(n, d))
        self.mu = rng.uniform(-1.0, 1.0, size=K)
        self.p = rng.uniform(-1.0, 1.0, size=(K, d))
        self._q = self.p if symmetric else rng.uniform(-1.0, 1.0, size=(K, d))

    @property
    def q(self) -> np.ndarray:
        return self._q

    @classmethod
    def initialize(cls, hin: HIN, meta_paths, mode: str, d: int, symmetric: bool, rng):
        """Allocate every sub-meta-path record the mode will touch, eagerly,
        deduplicated by canonical key across the configured meta-paths."""
        key_order: list[tuple[str, ...]] = []
        seen = set()
        for mp in meta_paths:
            for _, key in sub_path_keys(mp, mode):
                if key not in seen:
                    seen.add(key)
                    key_order.append(key)
        return cls(hin.vertex_ids, d, key_order, symmetric, rng)

    def resolve_key(self, key) -> int:
        """Accepts a MetaPath, a name tuple, or a 'a|b|c' key string."""
        if isinstance(key, MetaPath):
            key = key.key()
        elif isinstance(key, str):
            key = tuple(key.split("|"))
        else:
            key = tuple(key)
        try:
            return self.key_index[key]
        except KeyError:
            raise ModelError(f"unknown sub-meta-path key {'|'.join(key)!r}") from None

    def key_matrix(self, meta_path: MetaPath, mode: str = "pair") -> np.ndarray:
        """(L, L) array mapping 1-based (i, j) to key ids; -1 where j < i
        (and off-diagonal in seq mode)."""
        L = len(meta_path)
        out = np.full((L, L), -1, dtype=np.int64)
        for (i, j), key in sub_path_keys(meta_path, mode):
            out[i - 1, j - 1] = self.resolve_key(key)
        return out


def score(params: ModelParameters, u: int, v: int, key) -> float:
    """f(u, v) under one sub-meta-path key; u, v are dense vertex indices."""
    k = params.resolve_key(key)
    n = len(params.vertex_ids)
    if not (0 <= u < n and 0 <= v < n):
        raise ModelError(f"vertex index out of range: ({u}, {v})")
    xu, xv = params.embeddings[u], params.embeddings[v]
    return float(params.mu[k] + params.p[k] @ xu + params.q[k] @ xv + xu @ xv)


def _terms(params, inst: PathInstance, meta_path: MetaPath, mode: str):
    if inst.meta_path != meta_path:
        raise MetaPathError("instance does not follow the given meta-path")
    w = inst.vertices
    for (i, j), key in sub_path_keys(meta_path, mode):
        yield w[i - 1], w[j], params.resolve_key(key)


def path_score_seq(params, inst, meta_path) -> float:
    """Sum of the L edge-level scores under length-1 sub-path keys."""
    return _path_score(params, inst, meta_path, "seq")


def path_score_pair(params, inst, meta_path) -> float:
    """Sum of the L(L+1)/2 pair scores keyed by their sub-meta-paths."""
    return _path_score(params, inst, meta_path, "pair")


def _path_score(params, inst, meta_path, mode) -> float:
    total = 0.0
    x, mu, p, q = params.embeddings, params.mu, params.p, params.q
    for a, b, k in _terms(params, inst, meta_path, mode):
        total += mu[k] + p[k] @ x[a] + q[k] @ x[b] + x[a] @ x[b]
    return float(total)


def loss_and_gradients(params, inst, meta_path, label: str, mode: str):
    """Loss and exact analytic partials for one instance.

    Positive label: loss = -log sigmoid(S); negative: -log(1 - sigmoid(S)),
    S the mode's path score.  Gradients touch only the instance's vertices
    and sub-path records.
    """
    if label not in LABELS:
        raise ModelError(f"label must be one of {LABELS}, got {label!r}")
    S = _path_score(params, inst, meta_path, mode)
    if label == "positive":
        loss = _softplus(-S)
        g = float(expit(S)) - 1.0  # d loss / d S
    else:
        loss = _softplus(S)
        g = float(expit(S))

    grads = GradientSet()
    x, p, q = params.embeddings, params.p, params.q
    for a, b, k in _terms(params, inst, meta_path, mode):
        grads.add(("mu", k), g)
        grads.add(("p", k), g * x[a])
        grads.add(("q", k), g * x[b])
        grads.add(("x", a), g * (p[k] + x[b]))
        grads.add(("x", b), g * (q[k] + x[a]))
    return loss, grads


def sgd_apply(params: ModelParameters, grads: GradientSet, lr: float) -> None:
    """theta <- theta - lr * grad for every touched parameter."""
    if not lr > 0:
        raise ModelError(f"learning rate must be positive, got {lr}")
    for (kind, idx), delta in grads.items():
        if not np.all(np.isfinite(delta)):
            raise NumericFault(f"non-finite gradient for {kind}[{idx}]")
        if kind == "x":
            params.embeddings[idx] -= lr * delta
        elif kind == "mu":
            params.mu[idx] -= lr * delta
        elif kind == "p":
            params.p[idx] -= lr * delta
        elif kind == "q":
            params.q[idx] -= lr * delta  # shared storage with p when symmetric
        else:
            raise ModelError(f"unknown parameter kind {kind!r}")


def save_embeddings(params: ModelParameters, path) -> None:
    """Text format: first line ``N d``, then ``vertex_id f_1 ... f_d``."""
    with open(path, "w", encoding="utf-8") as fh:
        n, d = params.embeddings.shape
        fh.write(f"{n} {d}\n")
        for vid, row in zip(params.vertex_ids, params.embeddings):
            fh.write(vid + " " + " ".join(f"{v:.17g}" for v in row) + "\n")


def load_embeddings(path):
    """Read the text embedding format back as (ids, (N, d) array)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ModelError(f"{path}: bad embedding header")
        n, d = int(header[0]), int(header[1])
        ids, rows = [], np.empty((n, d), dtype=np.float64)
        for i in range(n):
            fields = fh.readline().split()
            if len(fields) != d + 1:
                raise ModelError(f"{path}: bad embedding line {i + 2}")
            ids.append(fields[0])
            rows[i] = [float(v) for v in fields[1:]]
    return ids, rows


def save_biases(params: ModelParameters, path) -> None:
    """Sidecar: ``K d sym`` header, then ``key mu p_1..p_d q_1..q_d`` rows
    keyed by canonical sub-path strings."""
    with open(path, "w", encoding="utf-8") as fh:
        K, d = params.p.shape
        fh.write(f"{K} {d} {int(params.symmetric)}\n")
        for key, k in params.key_index.items():
            vals = np.concatenate(([params.mu[k]], params.p[k], params.q[k]))
            fh.write("|".join(key) + " " + " ".join(f"{v:.17g}" for v in vals) + "\n")


def load_biases(path):
    """Read the sidecar back as (key -> (mu, p, q), symmetric)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ModelError(f"{path}: bad sidecar header")
        K, d, sym = int(header[0]), int(header[1]), bool(int(header[2]))
        out = {}
        for i in range(K):
            fields = fh.readline().split()
            if len(fields) != 1 + 1 + 2 * d:
                raise ModelError(f"{path}: bad sidecar line {i + 2}")
            key = tuple(fields[0].split("|"))
            vals = np.array([float(v) for v in fields[1:]])
            out[key] = (vals[0], vals[1 : 1 + d], vals[1 + d :])
    return out, sym
