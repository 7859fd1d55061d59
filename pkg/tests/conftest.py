import random

import networkx as nx
import pytest

from cli.scenario_file import bundled_scenarios, load_scenario
from netmodel import NodeRecord, Topology

BUNDLED = [path.stem for path in bundled_scenarios()]


def random_connected_topology(n: int, p: float, seed: int, latency=(1, 20)) -> Topology:
    """gnp graph with its components chained together, nodes renumbered from 1"""
    g = nx.gnp_random_graph(n, p, seed=seed)
    components = sorted(sorted(c) for c in nx.connected_components(g))
    for left, right in zip(components, components[1:]):
        g.add_edge(left[0], right[0])
    rng = random.Random(seed)
    nodes = [NodeRecord(i + 1) for i in sorted(g.nodes)]
    links = [(u + 1, v + 1, float(rng.randint(*latency))) for u, v in sorted(g.edges)]
    return Topology.build(nodes, links)


@pytest.fixture
def random_topology():
    return random_connected_topology


@pytest.fixture(scope='session')
def two_teams_scenario():
    return load_scenario('two_teams')


@pytest.fixture
def two_teams(two_teams_scenario):
    return two_teams_scenario.topology


@pytest.fixture(scope='session')
def link_failure_scenario():
    return load_scenario('link_failure')


@pytest.fixture(scope='session')
def reference_scenario():
    return load_scenario('reference')


@pytest.fixture(params=BUNDLED)
def bundled(request):
    return load_scenario(request.param)
