"""Sampling-based training loop with weighted meta-paths and worker threads.

Each positive step draws a meta-path proportionally to its weight, samples
one positive instance, applies its update, then applies K negative updates
anchored at the positive's first vertex.  The learning rate decays
linearly from lr_init to lr_floor over the positive-sample budget.  The
budget is split into fixed-size chunks claimed by workers under a lock;
parameter updates themselves are lock-free (races tolerated as noise).
With one worker and a fixed seed the run is bit-reproducible.
"""

from __future__ import annotations

import json
import sys
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .counting import precompute_counts
from .graph import HIN
from .kernels import build_plan, run_chunk
from .metapath import MetaPath
from .model import ModelParameters
from .sampler import ZeroInstanceError, build_sampler


class TrainingError(Exception):
    pass


@dataclass
class TrainConfig:
    meta_paths: list  # (MetaPath, weight) pairs; weights sum to 1
    mode: str = "pair"
    d: int = 50
    K: int = 5
    gamma: float = 0.75
    total_samples: int = 1_000_000
    lr_init: float = 0.25
    lr_floor: float | None = None  # defaults to 1e-4 * lr_init
    threads: int = 1
    seed: int | None = None
    symmetric: bool = False
    chunk_size: int = 10_000

    def __post_init__(self):
        if self.lr_floor is None:
            self.lr_floor = 1e-4 * self.lr_init
        if not self.meta_paths:
            raise TrainingError("at least one meta-path is required")
        weights = [w for _, w in self.meta_paths]
        if any(w <= 0 for w in weights):
            raise TrainingError("meta-path weights must be positive")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise TrainingError(f"meta-path weights must sum to 1, got {sum(weights)}")
        if self.mode not in ("seq", "pair"):
            raise TrainingError(f"mode must be 'seq' or 'pair', got {self.mode!r}")
        if self.K < 1 or self.total_samples < 1 or self.d < 1 or self.threads < 1:
            raise TrainingError("K, total_samples, d, and threads must all be >= 1")
        if not (0 < self.lr_floor <= self.lr_init):
            raise TrainingError("need 0 < lr_floor <= lr_init")


@dataclass
class TrainReport:
    total_samples: int
    instance_updates: int
    wall_time: float
    final_lr: float
    threads: int
    seed: int
    windows: list = field(default_factory=list)  # (samples_end, lr, mean_loss)

    def window_losses(self):
        return [w[2] for w in self.windows]

    def to_json(self) -> str:
        return json.dumps(
            {
                "total_samples": self.total_samples,
                "instance_updates": self.instance_updates,
                "wall_time": round(self.wall_time, 6),
                "final_lr": self.final_lr,
                "threads": self.threads,
                "seed": self.seed,
                "mean_loss_first_window": self.windows[0][2] if self.windows else None,
                "mean_loss_last_window": self.windows[-1][2] if self.windows else None,
            }
        )


def schedule_lr(step: int, cfg: TrainConfig) -> float:
    """Linear decay: lr(0) = lr_init, lr(total_samples) = lr_floor."""
    if not (0 <= step <= cfg.total_samples):
        raise TrainingError(f"step {step} outside 0..{cfg.total_samples}")
    frac = step / cfg.total_samples
    return max(cfg.lr_floor, cfg.lr_init + (cfg.lr_floor - cfg.lr_init) * frac)


def resolve_seed(seed) -> int:
    """A concrete seed: the given one, or fresh OS entropy (recorded by callers)."""
    if seed is not None:
        return int(seed)
    return int(np.random.SeedSequence().entropy) % (2**63)


def train(hin: HIN, cfg: TrainConfig, progress=None):
    """Run the full training pipeline; returns (ModelParameters, TrainReport).

    Progress lines (one per chunk) and a final JSON record go to
    ``progress`` (defaults to stderr).
    """
    if progress is None:
        progress = sys.stderr
    seed = resolve_seed(cfg.seed)
    rng_init = np.random.Generator(np.random.Philox(key=seed))

    metas = [mp for mp, _ in cfg.meta_paths]
    weights = [w for _, w in cfg.meta_paths]
    params = ModelParameters.initialize(hin, metas, cfg.mode, cfg.d, cfg.symmetric, rng_init)

    samplers = []
    for mp in metas:
        counts = precompute_counts(hin, mp)
        if counts.total_instances() <= 0:
            raise ZeroInstanceError(f"meta-path {mp} has no instances in this graph")
        samplers.append(build_sampler(hin, mp, counts, cfg.gamma))

    plan = build_plan(samplers, weights, params, cfg.mode)
    report = run_workers(params, plan, cfg, seed, progress)
    print(report.to_json(), file=progress)
    return params, report


def run_workers(params: ModelParameters, plan, cfg: TrainConfig, seed: int, progress) -> TrainReport:
    """Drive the kernel over the sample budget with cfg.threads workers.

    Workers claim fixed-size chunks from a shared counter under a lock;
    everything else runs without synchronization.
    """
    t0 = time.perf_counter()
    lock = threading.Lock()
    state = {"next": 0, "error": None}
    windows = []
    stats_total = np.zeros(2)

    def worker(worker_id: int):
        rng = np.random.Generator(np.random.Philox(key=seed).jumped(worker_id + 1))
        verts = np.zeros(plan.L_max + 1, dtype=np.int64)
        dx = np.zeros((plan.L_max + 1, cfg.d), dtype=np.float64)
        trace = np.zeros((0, plan.L_max + 3), dtype=np.int64)
        stats = np.zeros(2, dtype=np.float64)
        while True:
            with lock:
                if state["error"] is not None:
                    return
                start = state["next"]
                if start >= cfg.total_samples:
                    return
                size = min(cfg.chunk_size, cfg.total_samples - start)
                state["next"] = start + size
            stats[:] = 0.0
            rc = run_chunk(
                start, size, cfg.total_samples, cfg.lr_init, cfg.lr_floor,
                cfg.K, cfg.mode == "pair", rng, *plan.kernel_args(),
                params.embeddings, params.mu, params.p, params.q,
                verts, dx, trace, stats,
            )
            with lock:
                if rc != 0:
                    state["error"] = TrainingError(
                        f"non-finite loss near sample {start} "
                        f"(lr={schedule_lr(start, cfg):.6g}); try a lower lr_init"
                    )
                    return
                stats_total[:] += stats
                end = start + size
                lr = schedule_lr(end, cfg)
                mean_loss = stats[0] / stats[1]
                windows.append((end, lr, mean_loss))
                print(f"samples={end} lr={lr:.6g} window_loss={mean_loss:.6g}", file=progress)

    threads = [threading.Thread(target=worker, args=(w,)) for w in range(cfg.threads)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if state["error"] is not None:
        raise state["error"]

    windows.sort(key=lambda w: w[0])
    return TrainReport(
        total_samples=cfg.total_samples,
        instance_updates=int(stats_total[1]),
        wall_time=time.perf_counter() - t0,
        final_lr=schedule_lr(cfg.total_samples, cfg),
        threads=cfg.threads,
        seed=seed,
        windows=windows,
    )
