import logging
import math
import random
from collections import deque

import pytest

from deployment import (
    all_ordered_pairs, brute_force_deploy, check_submodularity, greedy_deploy, is_selectable,
    lazy_greedy_deploy, redeploy, secure_path, selectable_count
)
from netmodel import NodeRecord, Topology, enumerate_simple_paths
from utils.errors import InstanceTooLargeError, SmanetError

GREEDY_RATIO = 1 - 1 / math.e


def _oracle_next_hops(topo, dst):
    """Independent BFS: lowest-id neighbor one hop closer to dst"""
    adjacency = {n: sorted(topo.neighbors(n)) for n in topo.node_ids}
    dist = {dst: 0}
    queue = deque([dst])
    while queue:
        node = queue.popleft()
        for u in adjacency[node]:
            if u not in dist:
                dist[u] = dist[node] + 1
                queue.append(u)
    return {n: next(u for u in adjacency[n] if dist.get(u) == dist[n] - 1)
            for n in dist if n != dst}


def _oracle_count(topo, upgrades, pairs, max_hops):
    total = 0
    for src, dst in pairs:
        next_hop = _oracle_next_hops(topo, dst)
        if src not in next_hop:
            continue
        for path in enumerate_simple_paths(topo, src, dst, max_hops):
            if all(v in upgrades or next_hop[v] == succ for v, succ in zip(path, path[1:])):
                total += 1
    return total


def test_selectability_of_the_secure_path(two_teams):
    assert is_selectable(two_teams, (2, 4, 6, 7, 8), {2}) is False
    assert is_selectable(two_teams, (2, 4, 6, 7, 8), {2, 4}) is True
    assert is_selectable(two_teams, (2, 4, 5, 8), {2}) is True
    assert is_selectable(two_teams, (2, 5, 8), set()) is True


def test_selectable_count_without_upgrades(two_teams):
    assert selectable_count(two_teams, set(), [(2, 8)], 4) == 1


def test_selectable_count_matches_oracle(two_teams):
    count = selectable_count(two_teams, {2, 4}, [(2, 8)], 4)
    assert count == _oracle_count(two_teams, {2, 4}, [(2, 8)], 4)
    assert count >= 3


@pytest.mark.parametrize('upgrades', [set(), {1}, {2, 4}, {1, 3, 5}, {1, 2, 3, 4, 5, 6, 7, 8}])
def test_selectable_count_all_pairs_matches_oracle(two_teams, upgrades):
    pairs = all_ordered_pairs(two_teams.node_ids)
    assert selectable_count(two_teams, upgrades, pairs, 5) == _oracle_count(two_teams, upgrades, pairs, 5)


def test_greedy_on_two_flows(two_teams):
    pairs = [(1, 8), (2, 8)]
    plan = greedy_deploy(two_teams, 2, pairs)
    best = brute_force_deploy(two_teams, 2, pairs)
    assert len(plan.upgrades) <= 2
    assert plan.objective == selectable_count(two_teams, plan.upgrades, pairs, 6)
    assert best.objective >= plan.objective >= GREEDY_RATIO * best.objective


def test_brute_force_finds_the_secure_pair(two_teams):
    plan = brute_force_deploy(two_teams, 2, [(2, 8)])
    assert plan.objective >= selectable_count(two_teams, {2, 4}, [(2, 8)], 6)
    assert plan.method == 'brute-force'


def test_brute_force_respects_cap(two_teams):
    with pytest.raises(InstanceTooLargeError) as info:
        brute_force_deploy(two_teams, 3, [(1, 8)], cap=10)
    assert info.value.subsets == 1 + 8 + 28 + 56


def test_negative_budget(two_teams):
    with pytest.raises(SmanetError):
        greedy_deploy(two_teams, -1, [(1, 8)])


def test_zero_budget_keeps_default_paths(two_teams):
    plan = greedy_deploy(two_teams, 0, [(1, 8), (2, 8)])
    assert plan.upgrades == frozenset()
    assert plan.objective == 2


def test_team_budgets(two_teams):
    pairs = all_ordered_pairs(two_teams.node_ids)
    plan = greedy_deploy(two_teams, 3, pairs, 5, team_budgets={'A': 1})
    assert len(plan.upgrades & {1, 2, 3, 4}) <= 1
    exact = brute_force_deploy(two_teams, 3, pairs, 5, team_budgets={'A': 1})
    assert len(exact.upgrades & {1, 2, 3, 4}) <= 1
    assert exact.objective >= plan.objective


def test_lazy_greedy_is_bounded_by_optimum(two_teams):
    pairs = all_ordered_pairs(two_teams.node_ids)
    lazy = lazy_greedy_deploy(two_teams, 2, pairs, 5)
    best = brute_force_deploy(two_teams, 2, pairs, 5)
    assert lazy.method == 'lazy-greedy'
    assert best.objective >= lazy.objective >= GREEDY_RATIO * best.objective


def test_greedy_quality_on_random_graphs(random_topology):
    """The bound is not guaranteed for this objective; these instances meet it"""
    rng = random.Random(2024)
    for seed in range(30):
        n = rng.randint(5, 10)
        topo = random_topology(n, 0.3, seed)
        pairs = all_ordered_pairs(topo.node_ids)
        budget = rng.randint(1, 3)
        max_hops = rng.randint(3, 5)
        greedy = greedy_deploy(topo, budget, pairs, max_hops)
        best = brute_force_deploy(topo, budget, pairs, max_hops)
        assert greedy.objective >= GREEDY_RATIO * best.objective, f"instance seed {seed}"
        assert greedy.objective <= best.objective


def _two_route_topology():
    """Short route 1-2-9 and a long route 1-3-4-5-6-9 that needs overrides at 1 and 3"""
    links = [(1, 2), (2, 9), (1, 3), (3, 4), (4, 5), (5, 6), (6, 9)]
    return Topology.build([NodeRecord(i) for i in (1, 2, 3, 4, 5, 6, 9)], [(a, b, 1.0) for a, b in links])


def test_greedy_can_miss_the_quality_bound(caplog):
    topo = _two_route_topology()
    with caplog.at_level(logging.WARNING, logger='deployment.deployment_manager'):
        greedy = greedy_deploy(topo, 2, [(1, 9)], 6)
        lazy = lazy_greedy_deploy(topo, 2, [(1, 9)], 6)
    best = brute_force_deploy(topo, 2, [(1, 9)], 6)
    assert greedy.upgrades == lazy.upgrades == frozenset()
    assert greedy.objective == 1
    assert best.upgrades == frozenset({1, 3})
    assert best.objective == 2
    assert greedy.objective < GREEDY_RATIO * best.objective
    assert "greedy stopped at objective 1 with 2 upgrades unspent" in caplog.text
    assert "lazy greedy stopped" in caplog.text


def test_spent_budget_is_not_reported(two_teams, caplog):
    with caplog.at_level(logging.WARNING, logger='deployment.deployment_manager'):
        plan = greedy_deploy(two_teams, 1, [(2, 8)])
    assert len(plan.upgrades) == 1
    assert "stopped at objective" not in caplog.text


def test_brute_force_prefers_fewer_upgrades_on_ties():
    # 2 alone opens 2-4-5; node 1 hangs off the destination and never helps
    nodes = [NodeRecord(i) for i in range(1, 6)]
    topo = Topology.build(nodes, [(1, 5, 1.0), (2, 3, 1.0), (3, 5, 1.0), (2, 4, 1.0), (4, 5, 1.0)])
    plan = brute_force_deploy(topo, 2, [(2, 5)], 4)
    assert plan.objective == 2
    assert selectable_count(topo, {1, 2}, [(2, 5)], 4) == 2
    assert plan.upgrades == frozenset({2})


def test_brute_force_takes_lexicographically_first_among_equal_sizes(two_teams):
    pairs = [(1, 8), (2, 8)]
    plan = brute_force_deploy(two_teams, 1, pairs)
    ties = [n for n in two_teams.node_ids
            if selectable_count(two_teams, {n}, pairs, 6) == plan.objective]
    assert plan.upgrades == frozenset({min(ties)})


def test_objective_is_monotone_on_random_graphs(random_topology):
    for seed in range(5):
        topo = random_topology(7, 0.4, seed)
        report = check_submodularity(topo, all_ordered_pairs(topo.node_ids), 4, samples=200, seed=seed)
        assert report.samples == 200
        assert report.is_monotone


def test_submodularity_counterexamples_are_reported(two_teams, caplog):
    pairs = [(2, 8)]
    with caplog.at_level(logging.WARNING, logger='deployment.deployment_manager'):
        report = check_submodularity(two_teams, pairs, samples=1000, seed=0)
    assert report.is_monotone
    assert not report.is_submodular
    # Upgrading 4 only helps once 2 already overrides its next hop
    for small, big, v in report.submodularity_violations:
        gain_small = selectable_count(two_teams, small | {v}, pairs, 6) - selectable_count(two_teams, small, pairs, 6)
        gain_big = selectable_count(two_teams, big | {v}, pairs, 6) - selectable_count(two_teams, big, pairs, 6)
        assert gain_small < gain_big
    assert "violate submodularity" in caplog.text


def test_secure_path_avoids_compromised_node(two_teams):
    assert secure_path(two_teams, {2, 4}, 2, 8, {5}, 6) == (2, 4, 6, 7, 8)
    assert secure_path(two_teams, {2}, 2, 8, {5}, 6) is None
    assert secure_path(two_teams, {2, 4}, 5, 8, {5}, 6) is None


def test_redeploy_reports_churn(two_teams):
    pairs = [(1, 8), (2, 8)]
    moved = two_teams.with_link_state(2, 5, up=False).with_link_state(1, 3, up=False)
    steps = redeploy([two_teams, moved, two_teams], 2, pairs)
    assert [s.index for s in steps] == [0, 1, 2]
    assert steps[0].added == steps[0].plan.upgrades
    assert steps[0].removed == frozenset()
    for before, after in zip(steps, steps[1:]):
        assert after.added == after.plan.upgrades - before.plan.upgrades
        assert after.removed == before.plan.upgrades - after.plan.upgrades
