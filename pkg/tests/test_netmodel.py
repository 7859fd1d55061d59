import random

import pytest

from netmodel import (
    EventKind, LinkRecord, NodeKind, NodeRecord, Topology, TopologyEvent, apply_event, default_max_hops,
    enumerate_simple_paths, latency_distances, legacy_next_hop, legacy_path, shortest_distances,
    validate_path
)
from utils.errors import InvalidPathError, SmanetError, UnknownLinkError, UnknownNodeError, UnreachableError


def _all_simple_paths(topo, src, dst, max_hops):
    adjacency = {n: set() for n in topo.node_ids}
    for link in topo.links:
        if link.up:
            adjacency[link.a].add(link.b)
            adjacency[link.b].add(link.a)
    found = []

    def dfs(path):
        node = path[-1]
        if node == dst:
            found.append(tuple(path))
            return
        if len(path) - 1 == max_hops:
            return
        for u in adjacency[node]:
            if u not in path:
                dfs(path + [u])

    dfs([src])
    return sorted(found)


def test_hop_distances_towards_8(two_teams):
    dist = shortest_distances(two_teams, 8)
    assert dist[2] == 2
    assert dist[4] == 2
    assert dist[1] == 3
    assert dist[8] == 0


def test_hop_distances_with_5_8_down(two_teams):
    dist = shortest_distances(two_teams.with_link_state(5, 8, up=False), 8)
    assert dist[4] == 3


def test_unreachable_is_none():
    topo = Topology.build([NodeRecord(1), NodeRecord(2), NodeRecord(3)], [(1, 2, 1.0)])
    assert shortest_distances(topo, 1)[3] is None
    with pytest.raises(UnreachableError):
        legacy_next_hop(topo, 3, 1)


def test_legacy_next_hops(two_teams):
    assert legacy_next_hop(two_teams, 2, 8) == 5
    assert legacy_next_hop(two_teams, 4, 8) == 5
    # 2 and 3 are both two hops from 8; the lower id wins
    assert legacy_next_hop(two_teams, 1, 8) == 2
    assert legacy_path(two_teams, 1, 8) == (1, 2, 5, 8)


def test_next_hop_at_destination(two_teams):
    with pytest.raises(InvalidPathError):
        legacy_next_hop(two_teams, 8, 8)


def test_enumerate_paths_names_all_three_routes(two_teams):
    paths = enumerate_simple_paths(two_teams, 2, 8, 4)
    for expected in [(2, 5, 8), (2, 4, 5, 8), (2, 4, 6, 7, 8)]:
        assert expected in paths
    assert paths == sorted(paths)
    assert all(len(p) - 1 <= 4 for p in paths)


def test_enumerate_paths_matches_dfs(two_teams):
    assert enumerate_simple_paths(two_teams, 1, 8, 5) == _all_simple_paths(two_teams, 1, 8, 5)


def test_enumerate_paths_rejects_bad_bounds(two_teams):
    with pytest.raises(InvalidPathError):
        enumerate_simple_paths(two_teams, 1, 8, 0)
    with pytest.raises(InvalidPathError):
        enumerate_simple_paths(two_teams, 1, 1, 3)


def test_link_down_event(two_teams):
    after = apply_event(two_teams, TopologyEvent.link_down(1, 2, 5000))
    assert not after.link_up(1, 2)
    assert after.version == two_teams.version + 1
    assert two_teams.link_up(1, 2)


def test_repeated_link_down_is_idempotent(two_teams):
    once = apply_event(two_teams, TopologyEvent.link_down(2, 1))
    twice = apply_event(once, TopologyEvent.link_down(1, 2))
    assert twice.link_states() == once.link_states()
    assert twice.version == once.version + 1


def test_unknown_link_event(two_teams):
    with pytest.raises(UnknownLinkError):
        apply_event(two_teams, TopologyEvent.link_down(1, 8))


def test_compromise_and_restore(two_teams):
    marked = apply_event(two_teams, TopologyEvent(0, EventKind.NODE_COMPROMISED, 5))
    assert marked.compromised == {5}
    restored = apply_event(marked, TopologyEvent(0, EventKind.NODE_RESTORED, 5))
    assert restored.compromised == frozenset()


def test_topology_invariants():
    with pytest.raises(SmanetError):
        Topology.build([NodeRecord(1), NodeRecord(1)], [])
    with pytest.raises(SmanetError):
        LinkRecord(1, 1, 5.0)
    with pytest.raises(SmanetError):
        LinkRecord(1, 2, 0.0)
    with pytest.raises(SmanetError):
        Topology.build([NodeRecord(1), NodeRecord(2)], [(1, 2, 1.0), (2, 1, 3.0)])
    with pytest.raises(UnknownNodeError):
        Topology.build([NodeRecord(1)], [(1, 9, 1.0)])
    with pytest.raises(SmanetError):
        NodeRecord(0)
    with pytest.raises(SmanetError):
        NodeRecord(3, NodeKind.CLOUDLET, battery=50.0)


def test_latency_distances(two_teams):
    assert latency_distances(two_teams, 1)[8] == pytest.approx(32.0)


def test_default_max_hops_is_diameter_plus_two(two_teams):
    assert two_teams.diameter == 4
    assert default_max_hops(two_teams) == 6


def test_validate_path(two_teams):
    validate_path(two_teams, (2, 4, 6, 7, 8))
    with pytest.raises(InvalidPathError):
        validate_path(two_teams, (2, 4, 2))
    with pytest.raises(InvalidPathError):
        validate_path(two_teams, (1, 8))
    with pytest.raises(InvalidPathError):
        validate_path(two_teams.with_link_state(4, 6, up=False), (2, 4, 6, 7, 8))


def test_with_upgrades(two_teams):
    upgraded = two_teams.with_upgrades({1, 7})
    assert upgraded.sdn_nodes == {1, 7}
    assert two_teams.sdn_nodes == {2, 4}


def _random_instances(random_topology, count=20):
    rng = random.Random(7)
    for seed in range(count):
        topo = random_topology(rng.randint(4, 12), 0.3, seed)
        # Drop one link so some instances lose reachability
        a, b = rng.choice(topo.links).key
        yield topo.with_link_state(a, b, up=False)


def test_legacy_routes_descend_to_the_destination(random_topology):
    for topo in _random_instances(random_topology):
        for dst in topo.node_ids:
            dist = shortest_distances(topo, dst)
            for src in topo.node_ids:
                if src == dst or dist[src] is None:
                    continue
                path = legacy_path(topo, src, dst)
                assert len(path) - 1 == dist[src]
                assert len(set(path)) == len(path)
                assert [dist[n] for n in path] == list(range(dist[src], -1, -1))


def test_up_neighbours_differ_by_at_most_one_hop(random_topology):
    for topo in _random_instances(random_topology):
        for dst in topo.node_ids:
            dist = shortest_distances(topo, dst)
            for link in topo.links:
                if not link.up:
                    continue
                da, db = dist[link.a], dist[link.b]
                assert (da is None) == (db is None)
                if da is not None:
                    assert abs(da - db) <= 1
