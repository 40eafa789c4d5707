import numpy as np
import pytest

from hinsim import load_hin, parse_meta_path
from hinsim.counting import dump_counts_tsv, precompute_counts
from hinsim.metapath import MetaPath

from conftest import TOY_SCHEMA
from oracles import oracle_counts, random_hin, random_meta_path


class TestToyGraph:
    def test_apa_counts(self, toy_hin, apa):
        table = precompute_counts(toy_hin, apa)
        idx = toy_hin.index_of
        assert table.at(idx("a1"), 3) == 1
        assert table.at(idx("a2"), 3) == 1
        assert table.at(idx("v1"), 3) == 0
        assert table.at(idx("p1"), 2) == 2
        assert table.at(idx("p2"), 2) == 1
        assert table.at(idx("a1"), 1) == 2
        assert table.at(idx("a2"), 1) == 3
        assert table.total_instances() == 5

    def test_apvpa_total(self, toy_hin, apvpa):
        assert precompute_counts(toy_hin, apvpa).total_instances() == 9

    def test_boundary_is_indicator(self, toy_hin, apa, apvpa):
        for mp in (apa, apvpa):
            boundary = precompute_counts(toy_hin, mp).position(len(mp) + 1)
            assert set(np.unique(boundary)) <= {0.0, 1.0}


class TestOracleEquivalence:
    def test_random_unit_weight_graphs(self):
        rng = np.random.Generator(np.random.Philox(key=11))
        checked = 0
        while checked < 25:
            hin = random_hin(rng)
            mp = random_meta_path(rng, hin.schema)
            if mp is None:
                continue
            table = precompute_counts(hin, mp)
            np.testing.assert_array_equal(table.counts, oracle_counts(hin, mp))
            checked += 1

    def test_random_weighted_graphs(self):
        # weights in {0.5, 1, 2} keep float sums exact
        rng = np.random.Generator(np.random.Philox(key=13))
        checked = 0
        while checked < 15:
            hin = random_hin(rng, unit_weights=False)
            mp = random_meta_path(rng, hin.schema)
            if mp is None:
                continue
            table = precompute_counts(hin, mp)
            np.testing.assert_array_equal(table.counts, oracle_counts(hin, mp))
            checked += 1

    def test_parallel_edges_multiply_counts(self, apa):
        doubled = load_hin(
            TOY_SCHEMA,
            ["a1\tp1\tA-P", "a1\tp1\tA-P", "p1\tv1\tP-V"],
        )
        mp = parse_meta_path("A-P-A", doubled.schema)
        table = precompute_counts(doubled, mp)
        # two parallel a1-p1 edges: 2 edges x 2 edges = 4 instances
        assert table.total_instances() == 4
        np.testing.assert_array_equal(table.counts, oracle_counts(doubled, mp))


class TestComplexityAndEdgeCases:
    def test_edge_visit_bound(self, toy_hin, apvpa):
        table = precompute_counts(toy_hin, apvpa)
        n_edges = toy_hin.adjacency_entry_count()
        bound = (toy_hin.n_vertices + n_edges) * len(apvpa)
        assert 0 < table.edge_visits <= bound

    def test_zero_instance_meta_path_all_zero(self):
        hin = load_hin(TOY_SCHEMA, ["a1\tp1\tA-P"])  # no P-V edges
        mp = parse_meta_path("A-P-V", hin.schema)
        table = precompute_counts(hin, mp)
        assert table.total_instances() == 0
        assert np.all(table.position(1) == 0)

    def test_position_out_of_range(self, toy_hin, apa):
        table = precompute_counts(toy_hin, apa)
        with pytest.raises(IndexError):
            table.position(0)
        with pytest.raises(IndexError):
            table.position(4)


def test_dump_tsv_format(toy_hin, apa, tmp_path):
    import io

    table = precompute_counts(toy_hin, apa)
    buf = io.StringIO()
    dump_counts_tsv(table, toy_hin, buf)
    lines = buf.getvalue().strip().split("\n")
    assert len(lines) == toy_hin.n_vertices * 3
    rows = {(f[0], int(f[1])): float(f[2]) for f in (l.split("\t") for l in lines)}
    assert rows[("a2", 1)] == 3
    assert rows[("p1", 2)] == 2
    assert rows[("v1", 1)] == 0
