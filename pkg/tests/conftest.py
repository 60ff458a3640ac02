import pytest

from dacsim.benchmark import FAILURE_TIME, NODES, POST_FAILURE_EDGES, PRE_FAILURE_EDGES
from dacsim.graph import Topology, TopologySchedule


@pytest.fixture(scope="session")
def pre_topology() -> Topology:
    return Topology(tuple(NODES), tuple(map(tuple, PRE_FAILURE_EDGES)))


@pytest.fixture(scope="session")
def post_topology() -> Topology:
    return Topology(tuple(NODES), tuple(map(tuple, POST_FAILURE_EDGES)))


@pytest.fixture(scope="session")
def benchmark_schedule(pre_topology, post_topology) -> TopologySchedule:
    return TopologySchedule(((0.0, pre_topology), (FAILURE_TIME, post_topology)))


@pytest.fixture(scope="session")
def triangle() -> Topology:
    return Topology((1, 2, 3), ((1, 2), (2, 3), (1, 3)))


@pytest.fixture(scope="session")
def single_edge() -> Topology:
    return Topology((1, 2), ((1, 2),))
