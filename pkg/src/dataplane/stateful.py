"""
Stateful data plane: per-node link-state machines and state-dependent rules
that let a node fail over to a precomputed backup neighbor on its own.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import AbstractSet, Dict, Iterable, List, Mapping, Optional, Tuple

from netmodel.events import EventKind, TopologyEvent
from netmodel.routing import legacy_next_hop
from netmodel.topology import LinkKey, Topology, link_key
from policy.rule_table import (
    PRIORITY_FAILOVER, PRIORITY_PRIMARY, ActionKind, FlowRule, Header, LinkState,
    RuleAction, RuleMatch, RuleTable, StatePredicate, match_rule
)
from utils.errors import LinkMismatchError, UnreachableError

logger = logging.getLogger(__name__)

DEFAULT_DETECTION_DELAY_MS = 50.0


@dataclass(frozen=True)
class LinkStateMachine:
    node: int
    link: LinkKey
    state: LinkState = LinkState.UP
    detection_delay_ms: float = DEFAULT_DETECTION_DELAY_MS
    changed_at_ms: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'link', link_key(*self.link))


def transition(machine: LinkStateMachine, ev: TopologyEvent) -> LinkStateMachine:
    """Two-state update; the new state takes effect detection_delay after the event"""
    if not ev.kind.is_link_event or ev.link != machine.link:
        raise LinkMismatchError(f"machine on node {machine.node} monitors {machine.link}, "
                                f"event {ev.kind.value} concerns {ev.link if ev.b is not None else ev.a}")
    state = LinkState.DOWN if ev.kind is EventKind.LINK_DOWN else LinkState.UP
    return replace(machine, state=state, changed_at_ms=ev.time_ms + machine.detection_delay_ms)


@dataclass
class BackupPlan:
    node: int
    rules: List[FlowRule] = field(default_factory=list)
    protected: Dict[int, Tuple[int, int]] = field(default_factory=dict)
    unprotected: List[int] = field(default_factory=list)


def backup_next_hop(topo: Topology, node: int, dst: int, primary: int) -> Optional[int]:
    """
    Lowest-id neighbor other than the primary that is a loop-free alternate:
    no farther from dst than node itself, and still connected to dst once the
    primary link is gone.
    """
    here = topo.hop_distances(dst).get(node)
    cut = topo.without_links([(node, primary)]).hop_distances(dst)
    for u in topo.neighbors(node):
        if u == primary:
            continue
        there = topo.hop_distances(dst).get(u)
        if there is not None and here is not None and there <= here and u in cut:
            return u
    return None


def precompute_backup_rules(topo: Topology, node: int, dst_set: Iterable[int],
                            monitored: Optional[AbstractSet[LinkKey]] = None) -> BackupPlan:
    """UP/DOWN rule pair per destination whose primary link is monitored by node"""
    plan = BackupPlan(node)
    watched = None if monitored is None else {link_key(*k) for k in monitored}
    for dst in sorted(set(dst_set)):
        if dst == node:
            continue
        try:
            primary = legacy_next_hop(topo, node, dst)
        except UnreachableError:
            continue
        link = link_key(node, primary)
        if watched is not None and link not in watched:
            continue
        backup = backup_next_hop(topo, node, dst, primary)
        if backup is None:
            plan.unprotected.append(dst)
            continue
        plan.protected[dst] = (primary, backup)
        plan.rules.append(FlowRule(RuleMatch(dst=dst, state=StatePredicate(link, LinkState.UP)),
                                   RuleAction.forward(primary), PRIORITY_PRIMARY, 'stateful'))
        plan.rules.append(FlowRule(RuleMatch(dst=dst, state=StatePredicate(link, LinkState.DOWN)),
                                   RuleAction.forward(backup), PRIORITY_FAILOVER, 'stateful'))
    if plan.unprotected:
        logger.info(f"[DATAPLANE] Node {node}: no loop-free alternate towards {plan.unprotected}")
    return plan


def stateful_forward(table: Optional[RuleTable], machines: Mapping[LinkKey, LinkStateMachine],
                     header: Header) -> RuleAction:
    states = {key: m.state for key, m in machines.items()}
    return match_rule(table, header, states)


@dataclass
class StatefulInstall:
    machines: Dict[int, Dict[LinkKey, LinkStateMachine]] = field(default_factory=dict)
    rules: Dict[int, List[FlowRule]] = field(default_factory=dict)
    plans: Dict[int, BackupPlan] = field(default_factory=dict)

    def tables(self) -> Dict[int, RuleTable]:
        return {node: RuleTable.build(node, rules) for node, rules in sorted(self.rules.items())}


def install_stateful_tables(topo: Topology, upgrades: AbstractSet[int],
                            monitored: Optional[Iterable[LinkKey]] = None,
                            detection_delay_ms: float = DEFAULT_DETECTION_DELAY_MS) -> StatefulInstall:
    """
    Machines and failover rules for every SDN node. Without an explicit
    monitored set each node watches all of its incident links.
    """
    chosen = None if monitored is None else {link_key(*k) for k in monitored}
    install = StatefulInstall()
    for node in sorted(upgrades):
        links = [k for k in topo.incident_links(node) if chosen is None or k in chosen]
        install.machines[node] = {
            k: LinkStateMachine(node, k, LinkState.UP if topo.link_up(*k) else LinkState.DOWN, detection_delay_ms)
            for k in links
        }
        plan = precompute_backup_rules(topo, node, topo.node_ids, set(links))
        install.plans[node] = plan
        install.rules[node] = plan.rules
    return install


@dataclass
class LoopCheck:
    loop_free: bool
    cycle: Optional[Tuple[int, ...]] = None
    flow: Optional[Tuple[int, int]] = None

    def __bool__(self) -> bool:
        return self.loop_free


def check_loop_free(topo: Topology, tables: Mapping[int, RuleTable], failed_links: Iterable[LinkKey],
                    ttl: int = 32) -> LoopCheck:
    """
    Walk every (src, dst) through the forwarding state installed before the
    failure: legacy next hops of the intact topology and stateful rules that
    see the failed links as DOWN. Forwarding onto a failed link ends the walk
    as a drop; revisiting a node is a loop.
    """
    failed = {link_key(*k) for k in failed_links}
    for key in failed:
        topo.link(*key)
    states = {key: (LinkState.DOWN if key in failed or not up else LinkState.UP)
              for key, up in topo.link_states().items()}
    nodes = topo.node_ids
    for src in nodes:
        for dst in nodes:
            if src == dst:
                continue
            header = Header(src, dst, 0)
            node, path = src, [src]
            while node != dst:
                action = match_rule(tables.get(node), header, states)
                if action.kind is ActionKind.DROP:
                    break
                if action.kind is ActionKind.FORWARD:
                    next_hop = action.next_hop
                else:
                    try:
                        next_hop = legacy_next_hop(topo, node, dst)
                    except UnreachableError:
                        break
                if not topo.has_link(node, next_hop) or link_key(node, next_hop) in failed:
                    break
                if next_hop in path:
                    cycle = tuple(path[path.index(next_hop):])
                    logger.warning(f"[DATAPLANE] Forwarding loop {cycle} for {src}->{dst} "
                                   f"with failed links {sorted(failed)}")
                    return LoopCheck(False, cycle, (src, dst))
                if len(path) > ttl:
                    return LoopCheck(False, tuple(path), (src, dst))
                node = next_hop
                path.append(node)
    return LoopCheck(True)
