"""Compiled training engine: fused sample + score + update loops.

The per-meta-path alias tables are flattened into contiguous arenas so a
single nopython kernel can draw a weighted meta-path, walk a positive
instance, draw its negative sequences, and apply the stochastic gradient
updates without returning to the interpreter.  The kernel releases the
GIL, so several Python threads run it concurrently on the same parameter
arrays — unsynchronized lock-free updates whose races are tolerated as
gradient noise.  One thread with a fixed seed is bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .alias import AliasTable
from .model import ModelParameters


@dataclass
class TrainingPlan:
    """All sampler state flattened for the kernel; immutable once built."""

    n_vertices: int
    L_arr: np.ndarray  # (n_mp,) meta-path lengths
    L_max: int
    mp_prob: np.ndarray  # alias table over meta-paths ~ lambda
    mp_alias: np.ndarray
    start_off: np.ndarray  # (n_mp+1,) slices into the start-table arrays
    start_sup: np.ndarray
    start_prob: np.ndarray
    start_alias: np.ndarray
    negtab_base: np.ndarray  # (n_mp+1,) first negative-table id per meta-path
    neg_off: np.ndarray  # (sum L_m + 1,) slices into the negative arrays
    neg_sup: np.ndarray
    neg_prob: np.ndarray
    neg_alias: np.ndarray
    steprow_base: np.ndarray  # (n_mp,) offset of each meta-path's row block
    step_off: np.ndarray  # flattened (L, n+1) row offsets, absolute, + sentinel
    step_prob: np.ndarray
    step_alias: np.ndarray
    step_target: np.ndarray
    key_base: np.ndarray  # (n_mp,) offset of each meta-path's (L, L) key block
    key_idx: np.ndarray  # flattened key matrices, -1 where unused

    def kernel_args(self):
        return (
            self.mp_prob, self.mp_alias, self.L_arr,
            self.start_off, self.start_sup, self.start_prob, self.start_alias,
            self.negtab_base, self.neg_off, self.neg_sup, self.neg_prob, self.neg_alias,
            self.steprow_base, self.step_off, self.step_prob, self.step_alias,
            self.step_target, self.key_base, self.key_idx, self.n_vertices,
        )


def build_plan(samplers, weights, params: ModelParameters, mode: str) -> TrainingPlan:
    """Flatten per-meta-path sampler states and parameter-key lookups."""
    n_mp = len(samplers)
    n = samplers[0].count_table.counts.shape[1]
    L_arr = np.array([len(s.meta_path) for s in samplers], dtype=np.int64)

    lam = AliasTable(np.arange(n_mp), np.asarray(weights, dtype=np.float64))

    start_off = np.zeros(n_mp + 1, dtype=np.int64)
    start_sup, start_prob, start_alias = [], [], []
    for m, s in enumerate(samplers):
        t = s.start_table
        start_sup.append(t.support)
        start_prob.append(t.prob)
        start_alias.append(t.alias)
        start_off[m + 1] = start_off[m] + len(t)

    negtab_base = np.zeros(n_mp + 1, dtype=np.int64)
    negtab_base[1:] = np.cumsum(L_arr)
    neg_off = np.zeros(negtab_base[-1] + 1, dtype=np.int64)
    neg_sup, neg_prob, neg_alias = [], [], []
    t_id = 0
    for s in samplers:
        for table in s.negative_tables:
            neg_sup.append(table.support)
            neg_prob.append(table.prob)
            neg_alias.append(table.alias)
            neg_off[t_id + 1] = neg_off[t_id] + len(table)
            t_id += 1

    steprow_base = np.zeros(n_mp, dtype=np.int64)
    step_off_parts, step_prob_p, step_alias_p, step_target_p = [], [], [], []
    arena_base = 0
    row_base = 0
    for m, s in enumerate(samplers):
        steprow_base[m] = row_base
        step_off_parts.append(s.step_offsets.ravel() + arena_base)
        step_prob_p.append(s.step_prob)
        step_alias_p.append(s.step_alias)
        step_target_p.append(s.step_target)
        arena_base += len(s.step_prob)
        row_base += L_arr[m] * (n + 1)
    step_off_parts.append(np.array([arena_base], dtype=np.int64))

    key_base = np.zeros(n_mp, dtype=np.int64)
    key_parts = []
    base = 0
    for m, s in enumerate(samplers):
        key_base[m] = base
        mat = params.key_matrix(s.meta_path, mode)
        key_parts.append(mat.ravel())
        base += mat.size

    return TrainingPlan(
        n_vertices=n,
        L_arr=L_arr,
        L_max=int(L_arr.max()),
        mp_prob=lam.prob,
        mp_alias=lam.alias,
        start_off=start_off,
        start_sup=np.concatenate(start_sup),
        start_prob=np.concatenate(start_prob),
        start_alias=np.concatenate(start_alias),
        negtab_base=negtab_base,
        neg_off=neg_off,
        neg_sup=np.concatenate(neg_sup),
        neg_prob=np.concatenate(neg_prob),
        neg_alias=np.concatenate(neg_alias),
        steprow_base=steprow_base,
        step_off=np.concatenate(step_off_parts),
        step_prob=np.concatenate(step_prob_p),
        step_alias=np.concatenate(step_alias_p),
        step_target=np.concatenate(step_target_p),
        key_base=key_base,
        key_idx=np.concatenate(key_parts),
    )


@njit(cache=True, nogil=True, inline="always")
def _pick(rng, prob, alias, lo, width):
    j = int(rng.random() * width)
    if j >= width:
        j = width - 1
    if rng.random() >= prob[lo + j]:
        j = alias[lo + j]
    return j


@njit(cache=True, nogil=True)
def _optimize(emb, mu, pvec, qvec, verts, L, key_idx, kb, pair_mode, positive, lr, dx):
    """Score one (possibly disconnected) instance and apply the SGD step.

    All partials are evaluated at pre-update parameter values: the vertex
    deltas are buffered in ``dx`` and every bias update only reads
    embeddings, so the applied step is the exact analytic gradient.
    Returns the instance loss.
    """
    d = emb.shape[1]
    S = 0.0
    for i in range(1, L + 1):
        a = verts[i - 1]
        j_hi = L if pair_mode else i
        for j in range(i, j_hi + 1):
            b = verts[j]
            k = key_idx[kb + (i - 1) * L + (j - 1)]
            acc = mu[k]
            for c in range(d):
                acc += pvec[k, c] * emb[a, c] + qvec[k, c] * emb[b, c] + emb[a, c] * emb[b, c]
            S += acc

    if S >= 0.0:
        sig = 1.0 / (1.0 + math.exp(-S))
    else:
        z = math.exp(S)
        sig = z / (1.0 + z)
    if positive:
        g = sig - 1.0
        loss = math.log1p(math.exp(-S)) if S >= 0.0 else -S + math.log1p(math.exp(S))
    else:
        g = sig
        loss = S + math.log1p(math.exp(-S)) if S >= 0.0 else math.log1p(math.exp(S))

    for i in range(L + 1):
        for c in range(d):
            dx[i, c] = 0.0
    for i in range(1, L + 1):
        a = verts[i - 1]
        j_hi = L if pair_mode else i
        for j in range(i, j_hi + 1):
            b = verts[j]
            k = key_idx[kb + (i - 1) * L + (j - 1)]
            for c in range(d):
                dx[i - 1, c] += g * (pvec[k, c] + emb[b, c])
                dx[j, c] += g * (qvec[k, c] + emb[a, c])
    for i in range(1, L + 1):
        a = verts[i - 1]
        j_hi = L if pair_mode else i
        for j in range(i, j_hi + 1):
            b = verts[j]
            k = key_idx[kb + (i - 1) * L + (j - 1)]
            mu[k] -= lr * g
            for c in range(d):
                pvec[k, c] -= lr * g * emb[a, c]
                qvec[k, c] -= lr * g * emb[b, c]
    for i in range(L + 1):
        v = verts[i]
        for c in range(d):
            emb[v, c] -= lr * dx[i, c]
    return loss


@njit(cache=True, nogil=True)
def run_chunk(
    chunk_start, chunk_size, total_samples, lr_init, lr_floor, K, pair_mode,
    rng,
    mp_prob, mp_alias, L_arr,
    start_off, start_sup, start_prob, start_alias,
    negtab_base, neg_off, neg_sup, neg_prob, neg_alias,
    steprow_base, step_off, step_prob, step_alias, step_target,
    key_base, key_idx, n_vertices,
    emb, mu, pvec, qvec,
    verts, dx, trace, stats,
):
    """Process ``chunk_size`` positive steps starting at global step
    ``chunk_start``; each applies one positive and K negative updates.

    stats accumulates [loss_sum, instance_count].  The first rows of
    ``trace`` record [meta_path, label, v_1..v_{L+1}] per instance for
    test instrumentation (size the array 0 to disable).  Returns 0, or 1
    when a loss went non-finite.
    """
    n_mp = L_arr.shape[0]
    trace_cap = trace.shape[0]
    traced = 0
    loss_sum = 0.0
    count = 0.0
    for s in range(chunk_size):
        step = chunk_start + s
        lr = lr_init + (lr_floor - lr_init) * (step / total_samples)
        if lr < lr_floor:
            lr = lr_floor

        m = 0
        if n_mp > 1:
            m = _pick(rng, mp_prob, mp_alias, 0, n_mp)
        L = L_arr[m]
        kb = key_base[m]

        lo = start_off[m]
        j = _pick(rng, start_prob, start_alias, lo, start_off[m + 1] - lo)
        u = start_sup[lo + j]
        verts[0] = u
        for i in range(1, L + 1):
            row = steprow_base[m] + (i - 1) * (n_vertices + 1) + u
            lo = step_off[row]
            j = _pick(rng, step_prob, step_alias, lo, step_off[row + 1] - lo)
            u = step_target[lo + j]
            verts[i] = u

        loss = _optimize(emb, mu, pvec, qvec, verts, L, key_idx, kb, pair_mode, True, lr, dx)
        if not math.isfinite(loss):
            stats[0] = loss_sum
            stats[1] = count
            return 1
        loss_sum += loss
        count += 1.0
        if traced < trace_cap:
            trace[traced, 0] = m
            trace[traced, 1] = 1
            for i in range(L + 1):
                trace[traced, 2 + i] = verts[i]
            traced += 1

        for _ in range(K):
            for i in range(2, L + 2):
                t = negtab_base[m] + (i - 2)
                lo = neg_off[t]
                j = _pick(rng, neg_prob, neg_alias, lo, neg_off[t + 1] - lo)
                verts[i - 1] = neg_sup[lo + j]
            loss = _optimize(emb, mu, pvec, qvec, verts, L, key_idx, kb, pair_mode, False, lr, dx)
            if not math.isfinite(loss):
                stats[0] = loss_sum
                stats[1] = count
                return 1
            loss_sum += loss
            count += 1.0
            if traced < trace_cap:
                trace[traced, 0] = m
                trace[traced, 1] = 0
                for i in range(L + 1):
                    trace[traced, 2 + i] = verts[i]
                traced += 1

    stats[0] = loss_sum
    stats[1] = count
    return 0


def run_traced(plan: TrainingPlan, params: ModelParameters, mode, K, rng,
               chunk_start=0, chunk_size=1, total_samples=1, lr_init=0.25,
               lr_floor=None, trace_cap=None):
    """Convenience wrapper used by tests: run one chunk and return
    (trace array, stats, return code)."""
    if lr_floor is None:
        lr_floor = 1e-4 * lr_init
    if trace_cap is None:
        trace_cap = chunk_size * (K + 1)
    verts = np.zeros(plan.L_max + 1, dtype=np.int64)
    dx = np.zeros((plan.L_max + 1, params.d), dtype=np.float64)
    trace = np.full((trace_cap, plan.L_max + 3), -1, dtype=np.int64)
    stats = np.zeros(2, dtype=np.float64)
    rc = run_chunk(
        chunk_start, chunk_size, total_samples, lr_init, lr_floor, K,
        mode == "pair", rng, *plan.kernel_args(),
        params.embeddings, params.mu, params.p, params.q,
        verts, dx, trace, stats,
    )
    return trace, stats, rc
