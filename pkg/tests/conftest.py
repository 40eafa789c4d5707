import numpy as np
import pytest

from hinsim import load_hin, parse_meta_path

TOY_SCHEMA = [
    "vertex\tA",
    "vertex\tP",
    "vertex\tV",
    "edge\tA-P\tA\tP\tundirected",
    "edge\tP-V\tP\tV\tundirected",
]

TOY_EDGES = [
    "a1\tp1\tA-P",
    "a2\tp1\tA-P",
    "a2\tp2\tA-P",
    "p1\tv1\tP-V",
    "p2\tv1\tP-V",
]


@pytest.fixture
def toy_hin():
    """The 5-edge bibliographic toy graph used throughout."""
    return load_hin(TOY_SCHEMA, TOY_EDGES)


@pytest.fixture
def apa(toy_hin):
    return parse_meta_path("A-P-A", toy_hin.schema)


@pytest.fixture
def apvpa(toy_hin):
    return parse_meta_path("A-P-V-P-A", toy_hin.schema)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=20240817))
