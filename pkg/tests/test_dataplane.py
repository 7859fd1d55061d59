import logging

import pytest

from dataplane import (
    LinkStateMachine, backup_next_hop, check_loop_free, install_stateful_tables, precompute_backup_rules,
    stateful_forward, transition
)
from netmodel import EventKind, NodeRecord, Topology, TopologyEvent
from policy import (
    PRIORITY_FAILOVER, PRIORITY_PRIMARY, FlowRule, Header, LinkState, RuleAction, RuleMatch, RuleTable,
    StatePredicate
)
from utils.errors import LinkMismatchError


def _plain(n_links):
    nodes = sorted({end for a, b in n_links for end in (a, b)})
    return Topology.build([NodeRecord(i) for i in nodes], [(a, b, 1.0) for a, b in n_links])


def test_backup_rules_for_node_1(two_teams):
    plan = precompute_backup_rules(two_teams, 1, [8])
    assert plan.protected == {8: (2, 3)}
    up, down = sorted(plan.rules, key=lambda r: r.priority)
    assert up.priority == PRIORITY_PRIMARY
    assert up.match.state == StatePredicate((1, 2), LinkState.UP)
    assert up.action == RuleAction.forward(2)
    assert down.priority == PRIORITY_FAILOVER
    assert down.match.state == StatePredicate((1, 2), LinkState.DOWN)
    assert down.action == RuleAction.forward(3)


def test_backup_next_hop(two_teams):
    assert backup_next_hop(two_teams, 1, 8, 2) == 3
    assert backup_next_hop(two_teams, 2, 8, 5) == 4


def test_unprotected_destination_is_reported(caplog):
    line = _plain([(1, 2), (2, 3)])
    with caplog.at_level(logging.INFO, logger='dataplane.stateful'):
        plan = precompute_backup_rules(line, 2, [3])
    assert plan.unprotected == [3]
    assert plan.rules == []
    assert "no loop-free alternate" in caplog.text


def test_only_monitored_links_get_rules(two_teams):
    plan = precompute_backup_rules(two_teams, 1, [8, 3], monitored={(2, 1)})
    assert set(plan.protected) == {8}
    assert plan.unprotected == []


def test_transition():
    machine = LinkStateMachine(1, (2, 1))
    down = transition(machine, TopologyEvent.link_down(1, 2, 5000))
    assert down.state is LinkState.DOWN
    assert down.changed_at_ms == pytest.approx(5050.0)
    up = transition(down, TopologyEvent.link_up(2, 1, 7000))
    assert up.state is LinkState.UP
    assert machine.state is LinkState.UP


def test_transition_rejects_foreign_events():
    machine = LinkStateMachine(1, (1, 2))
    with pytest.raises(LinkMismatchError):
        transition(machine, TopologyEvent.link_down(2, 3, 0))
    with pytest.raises(LinkMismatchError):
        transition(machine, TopologyEvent(0, EventKind.NODE_COMPROMISED, 1))


def test_stateful_forward_follows_machine_state(two_teams):
    install = install_stateful_tables(two_teams, {1})
    table = install.tables()[1]
    machines = install.machines[1]
    assert stateful_forward(table, machines, Header(1, 8)) == RuleAction.forward(2)
    key = (1, 2)
    machines = dict(machines)
    machines[key] = transition(machines[key], TopologyEvent.link_down(1, 2, 0))
    assert stateful_forward(table, machines, Header(1, 8)) == RuleAction.forward(3)


def test_install_on_link_failure(link_failure_scenario):
    install = install_stateful_tables(link_failure_scenario.topology, {1, 2})
    assert set(install.machines) == {1, 2}
    assert set(install.machines[1]) == {(1, 2), (1, 3)}
    assert install.plans[1].protected[8] == (2, 3)
    assert install.plans[2].protected[8] == (5, 4)
    assert all(m.state is LinkState.UP for m in install.machines[2].values())


def test_every_single_failure_is_loop_free(two_teams):
    install = install_stateful_tables(two_teams, set(two_teams.node_ids))
    tables = install.tables()
    for link in two_teams.links:
        result = check_loop_free(two_teams, tables, [link.key])
        assert result, f"loop {result.cycle} after failing {link.key}"


def test_mutual_backups_loop():
    triangle = _plain([(1, 2), (2, 3), (1, 3)])
    tables = {
        1: RuleTable.build(1, [FlowRule(RuleMatch(dst=3, state=StatePredicate((1, 3), LinkState.DOWN)),
                                        RuleAction.forward(2), PRIORITY_FAILOVER)]),
        2: RuleTable.build(2, [FlowRule(RuleMatch(dst=3), RuleAction.forward(1), 100)]),
    }
    result = check_loop_free(triangle, tables, [(1, 3)])
    assert not result
    assert set(result.cycle) == {1, 2}
    assert result.flow[1] == 3
