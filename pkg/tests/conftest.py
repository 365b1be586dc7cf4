import numpy as np
import pytest
from hypothesis import settings

from rfox.instances import Graph, RfimInstance

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def make_instance(n, edges, fields, couplings=None, field_range=None):
    graph = Graph.from_edges(n, edges)
    couplings = (1.0,) * len(graph.edges) if couplings is None else couplings
    rng = field_range or max([abs(h) for h in fields] + [1.0])
    return RfimInstance(graph, tuple(couplings), tuple(fields), rng)


@pytest.fixture
def single_edge():
    return make_instance(2, [(0, 1)], (0.0, 0.0))


@pytest.fixture
def single_edge_fields():
    return make_instance(2, [(0, 1)], (2.0, -0.5), field_range=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
