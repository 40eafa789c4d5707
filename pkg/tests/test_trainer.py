import io
import json
import re

import numpy as np
import pytest

from hinsim.evaluation import SyntheticSpec, auc, generate_planted_hin
from hinsim.metapath import parse_meta_path
from hinsim.model import save_embeddings
from hinsim.sampler import ZeroInstanceError
from hinsim.search import SimilarityIndex
from hinsim.trainer import TrainConfig, TrainingError, schedule_lr, train


def planted(noise=0.05, seed=2):
    return generate_planted_hin(SyntheticSpec(noise=noise, seed=seed))


def planted_cfg(hin, **kw):
    mp = parse_meta_path("A-P-V-P-A", hin.schema)
    base = dict(meta_paths=[(mp, 1.0)], mode="pair", d=16, K=5,
                total_samples=200_000, threads=1, seed=1, lr_init=0.025)
    base.update(kw)
    return TrainConfig(**base)


class TestConfigValidation:
    def test_weights_must_sum_to_one(self, toy_hin, apa):
        with pytest.raises(TrainingError, match="sum to 1"):
            TrainConfig(meta_paths=[(apa, 0.5)], total_samples=10)

    def test_weights_must_be_positive(self, toy_hin, apa, apvpa):
        with pytest.raises(TrainingError, match="positive"):
            TrainConfig(meta_paths=[(apa, 1.5), (apvpa, -0.5)])

    def test_k_and_samples_bounds(self, apa):
        with pytest.raises(TrainingError):
            TrainConfig(meta_paths=[(apa, 1.0)], K=0)
        with pytest.raises(TrainingError):
            TrainConfig(meta_paths=[(apa, 1.0)], total_samples=0)

    def test_mode_checked(self, apa):
        with pytest.raises(TrainingError, match="mode"):
            TrainConfig(meta_paths=[(apa, 1.0)], mode="both")

    def test_lr_floor_default(self, apa):
        cfg = TrainConfig(meta_paths=[(apa, 1.0)], lr_init=0.5)
        assert cfg.lr_floor == pytest.approx(0.5 * 1e-4)


class TestSchedule:
    def test_endpoints_and_midpoint(self, apa):
        cfg = TrainConfig(meta_paths=[(apa, 1.0)], total_samples=1000,
                          lr_init=0.25, lr_floor=0.05)
        assert schedule_lr(0, cfg) == 0.25
        assert schedule_lr(1000, cfg) == pytest.approx(0.05)
        assert schedule_lr(500, cfg) == pytest.approx((0.25 + 0.05) / 2)

    def test_default_initial_value(self, apa):
        cfg = TrainConfig(meta_paths=[(apa, 1.0)])
        assert schedule_lr(0, cfg) == 0.25

    def test_out_of_range_step(self, apa):
        cfg = TrainConfig(meta_paths=[(apa, 1.0)], total_samples=10)
        with pytest.raises(TrainingError):
            schedule_lr(11, cfg)


class TestTrainLoop:
    def test_single_sample_accounting(self, toy_hin, apa):
        cfg = TrainConfig(meta_paths=[(apa, 1.0)], mode="pair", d=4, K=1,
                          total_samples=1, seed=3, lr_init=0.01)
        _, report = train(toy_hin, cfg, progress=io.StringIO())
        assert report.total_samples == 1
        assert report.instance_updates == 2  # one positive + one negative

    def test_update_accounting_general(self, toy_hin, apa):
        cfg = TrainConfig(meta_paths=[(apa, 1.0)], mode="seq", d=4, K=3,
                          total_samples=500, seed=3, lr_init=0.01)
        _, report = train(toy_hin, cfg, progress=io.StringIO())
        assert report.instance_updates == 500 * 4

    def test_work_conservation_across_chunks(self, toy_hin, apa):
        cfg = TrainConfig(meta_paths=[(apa, 1.0)], d=4, K=1, total_samples=25_000,
                          seed=3, lr_init=0.01, chunk_size=10_000)
        _, report = train(toy_hin, cfg, progress=io.StringIO())
        ends = [w[0] for w in report.windows]
        assert ends == [10_000, 20_000, 25_000]
        assert report.instance_updates == 25_000 * 2

    def test_zero_instance_meta_path_rejected(self, apa):
        from hinsim import load_hin
        from conftest import TOY_SCHEMA

        hin = load_hin(TOY_SCHEMA, ["p1\tv1\tP-V"], ["a1\tA"])
        mp = parse_meta_path("A-P", hin.schema)
        cfg = TrainConfig(meta_paths=[(mp, 1.0)], d=4, total_samples=10)
        with pytest.raises(ZeroInstanceError):
            train(hin, cfg, progress=io.StringIO())

    def test_progress_lines_and_final_json(self, toy_hin, apa):
        cfg = TrainConfig(meta_paths=[(apa, 1.0)], d=4, K=1, total_samples=5_000,
                          seed=3, lr_init=0.01, chunk_size=2_500)
        buf = io.StringIO()
        train(toy_hin, cfg, progress=buf)
        lines = buf.getvalue().strip().split("\n")
        for line in lines[:-1]:
            assert re.fullmatch(r"samples=\d+ lr=[\d.eE+-]+ window_loss=[\d.eE+-]+", line)
        final = json.loads(lines[-1])
        assert final["total_samples"] == 5_000
        assert final["threads"] == 1

    def test_non_finite_loss_aborts_with_diagnostics(self, toy_hin, apa):
        cfg = TrainConfig(meta_paths=[(apa, 1.0)], mode="pair", d=4, K=2,
                          total_samples=5_000, seed=3, lr_init=1e6, chunk_size=1_000)
        with pytest.raises(TrainingError, match="non-finite loss"):
            train(toy_hin, cfg, progress=io.StringIO())


class TestDeterminism:
    def test_single_thread_bit_reproducible(self, toy_hin, apa, tmp_path):
        files = []
        for run in range(2):
            cfg = TrainConfig(meta_paths=[(apa, 1.0)], d=8, K=2, total_samples=20_000,
                              threads=1, seed=7, lr_init=0.02)
            params, _ = train(toy_hin, cfg, progress=io.StringIO())
            path = tmp_path / f"run{run}.emb"
            save_embeddings(params, path)
            files.append(path.read_bytes())
        assert files[0] == files[1]

    def test_seed_changes_output(self, toy_hin, apa):
        outs = []
        for seed in (7, 8):
            cfg = TrainConfig(meta_paths=[(apa, 1.0)], d=8, K=2, total_samples=5_000,
                              threads=1, seed=seed, lr_init=0.02)
            params, _ = train(toy_hin, cfg, progress=io.StringIO())
            outs.append(params.embeddings.copy())
        assert not np.array_equal(outs[0], outs[1])

    def test_entropy_seed_recorded_when_absent(self, toy_hin, apa):
        cfg = TrainConfig(meta_paths=[(apa, 1.0)], d=4, K=1, total_samples=100,
                          lr_init=0.01, seed=None)
        _, report = train(toy_hin, cfg, progress=io.StringIO())
        assert isinstance(report.seed, int)


class TestPlantedRuns:
    def test_loss_trend_downward(self):
        hin, _ = planted()
        cfg = planted_cfg(hin, total_samples=100_000, chunk_size=10_000)
        _, report = train(hin, cfg, progress=io.StringIO())
        losses = report.window_losses()
        assert losses[-1] < losses[0]

    def test_threads_match_single_thread_quality(self):
        hin, grouping = planted()
        aucs = []
        for threads in (1, 4):
            cfg = planted_cfg(hin, total_samples=100_000, threads=threads, seed=7)
            params, report = train(hin, cfg, progress=io.StringIO())
            assert report.instance_updates == 100_000 * 6
            aucs.append(auc(SimilarityIndex(params.vertex_ids, params.embeddings), grouping))
        assert abs(aucs[0] - aucs[1]) <= 0.03

    def test_multi_meta_path_mixing(self):
        hin, grouping = planted()
        apa = parse_meta_path("A-P-A", hin.schema)
        apvpa = parse_meta_path("A-P-V-P-A", hin.schema)
        cfg = TrainConfig(meta_paths=[(apa, 0.1), (apvpa, 0.9)], mode="pair", d=16,
                          K=5, total_samples=100_000, threads=1, seed=1, lr_init=0.025)
        params, _ = train(hin, cfg, progress=io.StringIO())
        score = auc(SimilarityIndex(params.vertex_ids, params.embeddings), grouping)
        assert score >= 0.85
