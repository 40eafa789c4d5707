import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hinsim.graph import parse_schema
from hinsim.metapath import (
    AmbiguousStepError,
    IncompatibleStepError,
    MetaPath,
    MetaPathError,
    PathInstance,
    parse_meta_path,
    render_meta_path,
    sub_meta_path,
    validate_instance,
)

from conftest import TOY_SCHEMA


class TestParse:
    def test_apa(self, toy_hin):
        mp = parse_meta_path("A-P-A", toy_hin.schema)
        assert len(mp) == 2
        assert [s.edge_type.name for s in mp.steps] == ["A-P", "A-P"]
        assert [s.reverse for s in mp.steps] == [False, True]
        assert mp.vertex_type_names == ("A", "P", "A")

    def test_apvpa(self, toy_hin):
        assert len(parse_meta_path("A-P-V-P-A", toy_hin.schema)) == 4

    def test_incompatible_step(self, toy_hin):
        with pytest.raises(IncompatibleStepError, match="A-V"):
            parse_meta_path("A-V", toy_hin.schema)

    def test_empty_spec(self, toy_hin):
        with pytest.raises(MetaPathError):
            parse_meta_path("", toy_hin.schema)

    def test_single_vertex_spec(self, toy_hin):
        with pytest.raises(MetaPathError):
            parse_meta_path("A", toy_hin.schema)

    def test_ambiguous_step_requires_explicit_form(self):
        schema = parse_schema(
            [
                "vertex\tA",
                "vertex\tP",
                "edge\twrites\tA\tP\tundirected",
                "edge\treviews\tA\tP\tundirected",
            ]
        )
        with pytest.raises(AmbiguousStepError, match="reviews"):
            parse_meta_path("A-P", schema)
        mp = parse_meta_path("A-[writes]-P", schema)
        assert mp.steps[0].edge_type.name == "writes"
        # and back to A, picking the other type
        mp2 = parse_meta_path("A-[writes]-P-[reviews]-A", schema)
        assert [s.edge_type.name for s in mp2.steps] == ["writes", "reviews"]

    def test_unknown_qualifier(self, toy_hin):
        with pytest.raises(IncompatibleStepError, match="'nope'"):
            parse_meta_path("A-[nope]-P", toy_hin.schema)

    def test_directed_edge_only_forward(self):
        schema = parse_schema(["vertex\tP", "edge\tcites\tP\tP\tdirected"])
        mp = parse_meta_path("P-P", schema)
        assert not mp.steps[0].reverse


class TestRenderRoundTrip:
    def test_plain_walk(self, toy_hin):
        for spec in ("A-P-A", "A-P-V-P-A", "P-V"):
            mp = parse_meta_path(spec, toy_hin.schema)
            assert render_meta_path(mp, toy_hin.schema) == spec
            assert parse_meta_path(render_meta_path(mp, toy_hin.schema), toy_hin.schema) == mp

    def test_qualified_walk(self):
        schema = parse_schema(
            [
                "vertex\tA",
                "vertex\tP",
                "edge\twrites\tA\tP\tundirected",
                "edge\treviews\tA\tP\tundirected",
            ]
        )
        spec = "A-[writes]-P-[reviews]-A"
        mp = parse_meta_path(spec, schema)
        assert render_meta_path(mp, schema) == spec
        assert parse_meta_path(render_meta_path(mp, schema), schema) == mp


class TestSubMetaPath:
    def test_pvp_slice(self, toy_hin, apvpa):
        sub = sub_meta_path(apvpa, 2, 3)
        assert sub.vertex_type_names == ("P", "V", "P")
        assert sub == parse_meta_path("P-V-P", toy_hin.schema)

    def test_length_one(self, apvpa):
        for i in range(1, 5):
            assert len(sub_meta_path(apvpa, i, i)) == 1

    def test_identity(self, apvpa):
        assert sub_meta_path(apvpa, 1, 4) == apvpa

    def test_out_of_range(self, apvpa):
        for s, t in [(0, 2), (2, 5), (3, 2)]:
            with pytest.raises(MetaPathError):
                sub_meta_path(apvpa, s, t)

    @given(st.integers(1, 4), st.integers(1, 4))
    @settings(max_examples=30, deadline=None)
    def test_slices_are_valid_meta_paths(self, s, t):
        from hinsim import load_hin
        from conftest import TOY_EDGES

        hin = load_hin(TOY_SCHEMA, TOY_EDGES)
        mp = parse_meta_path("A-P-V-P-A", hin.schema)
        if s > t:
            s, t = t, s
        sub = sub_meta_path(mp, s, t)
        assert len(sub) == t - s + 1
        assert sub.steps == mp.steps[s - 1 : t]


class TestKeys:
    def test_undirected_orientations_share_names(self, apa):
        assert apa.key() == ("A-P", "A-P")
        assert apa.key_string() == "A-P|A-P"

    def test_sub_path_key_matches_slice(self, apvpa):
        assert sub_meta_path(apvpa, 2, 3).key() == ("P-V", "P-V")


class TestPathInstance:
    def test_round_trip_validation(self, toy_hin, apa):
        a1, p1, a2 = (toy_hin.index_of(v) for v in ("a1", "p1", "a2"))
        inst = PathInstance(apa, (a1, p1, a2))
        validate_instance(toy_hin, inst)
        assert inst.vertex_ids(toy_hin) == ("a1", "p1", "a2")

    def test_wrong_length_rejected(self, apa):
        with pytest.raises(MetaPathError):
            PathInstance(apa, (0, 1))

    def test_nonexistent_edge_rejected(self, toy_hin, apa):
        a1, p2 = toy_hin.index_of("a1"), toy_hin.index_of("p2")
        inst = PathInstance(apa, (a1, p2, a1))  # a1-p2 edge does not exist
        with pytest.raises(MetaPathError, match="no edge"):
            validate_instance(toy_hin, inst)

    def test_type_mismatch_rejected(self, toy_hin, apa):
        a1, v1 = toy_hin.index_of("a1"), toy_hin.index_of("v1")
        inst = PathInstance(apa, (a1, v1, a1))
        with pytest.raises(MetaPathError, match="mismatch"):
            validate_instance(toy_hin, inst)


def test_incompatible_chain_rejected_at_construction(apa):
    # A>P followed by A>P leaves a P/A gap
    with pytest.raises(IncompatibleStepError):
        MetaPath((apa.steps[0], apa.steps[0]))
