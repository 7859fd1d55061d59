"""
Compilation of need-to-know policies into per-node rule tables, and the
exhaustive per-flow walk used to verify them.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import AbstractSet, Dict, Iterable, List, Mapping, Optional, Tuple

from netmodel.routing import Path, legacy_next_hop, try_legacy_path, validate_path
from netmodel.topology import LinkKey, Topology
from policy.ntk_policy import FlowSpec, NtkPolicy
from policy.rule_table import (
    PRIORITY_NTK_DROP, PRIORITY_NTK_FORWARD, ActionKind, FlowRule, Header, LinkState,
    RuleAction, RuleMatch, RuleTable, match_rule
)
from utils.errors import PolicyError, SmanetError, UnreachableError

logger = logging.getLogger(__name__)

DEFAULT_TTL = 32


@dataclass
class CoverageReport:
    """Which flows have an SDN enforcement point on their route"""
    covered: List[FlowSpec] = field(default_factory=list)
    uncovered: List[FlowSpec] = field(default_factory=list)
    enforcement: Dict[FlowSpec, int] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return not self.uncovered


def enforcement_point(path: Optional[Path], upgrades: AbstractSet[int]) -> Optional[int]:
    """First SDN node on the route, the destination excluded"""
    if not path:
        return None
    for node_id in path[:-1]:
        if node_id in upgrades:
            return node_id
    return None


def enforcement_coverage(topo: Topology, upgrades: AbstractSet[int],
                         flows: Iterable[FlowSpec]) -> Tuple[List[FlowSpec], List[FlowSpec]]:
    covered, uncovered = [], []
    for flow in flows:
        path = try_legacy_path(topo, flow.src, flow.dst)
        if enforcement_point(path, upgrades) is None:
            uncovered.append(flow)
        else:
            covered.append(flow)
    return covered, uncovered


def _override_route(topo: Topology, flow: FlowSpec, path: Path, upgrades: AbstractSet[int]) -> Path:
    path = tuple(path)
    validate_path(topo, path)
    if path[0] != flow.src or path[-1] != flow.dst:
        raise PolicyError(f"override {path} does not connect {flow.src} to {flow.dst}")
    for v, succ in zip(path, path[1:]):
        if v not in upgrades and succ != legacy_next_hop(topo, v, flow.dst):
            raise PolicyError(f"override {path} needs legacy node {v} to leave its shortest path")
    return path


def compile_policy(policy: NtkPolicy, topo: Topology, upgrades: AbstractSet[int], flows: Iterable[FlowSpec],
                   overrides: Optional[Mapping[Tuple[int, int], Path]] = None,
                   pinned: Optional[Mapping[int, Iterable[FlowRule]]] = None
                   ) -> Tuple[Dict[int, RuleTable], CoverageReport]:
    """
    Install each flow's NTK decision at the first SDN node on its route.

    The route is the legacy path unless an override is configured for the
    (src, dst) pair. Cleared flows get a forward rule towards the route
    successor, plus forward rules at every later SDN node where the override
    leaves the legacy next hop; uncleared flows get a drop rule. Pinned
    operator rules are merged into the same tables. Flows whose route has
    no SDN node are reported in the coverage report.
    """
    upgrades = frozenset(upgrades)
    overrides = overrides or {}
    for node_id in upgrades:
        topo.node(node_id)

    rules: Dict[int, List[FlowRule]] = {node_id: [] for node_id in upgrades}
    coverage = CoverageReport()
    for flow in dict.fromkeys(flows):
        topo.node(flow.src)
        topo.node(flow.dst)
        access = policy.access_id(flow.category)
        if (flow.src, flow.dst) in overrides:
            path = _override_route(topo, flow, overrides[(flow.src, flow.dst)], upgrades)
        else:
            path = try_legacy_path(topo, flow.src, flow.dst)
        enforcer = enforcement_point(path, upgrades)
        if enforcer is None:
            coverage.uncovered.append(flow)
            logger.warning(f"[POLICY] Flow {flow.src}->{flow.dst} ({flow.category}) has no SDN node on "
                           f"its route; need-to-know cannot be enforced")
            continue
        coverage.covered.append(flow)
        coverage.enforcement[flow] = enforcer

        match = RuleMatch(flow.src, flow.dst, access)
        if not policy.is_cleared(topo.team_of(flow.dst), access):
            rules[enforcer].append(FlowRule(match, RuleAction.drop(), PRIORITY_NTK_DROP, 'ntk'))
            continue
        start = path.index(enforcer)
        for i in range(start, len(path) - 1):
            v, succ = path[i], path[i + 1]
            if v not in upgrades:
                continue
            if v == enforcer or succ != legacy_next_hop(topo, v, flow.dst):
                rules[v].append(FlowRule(match, RuleAction.forward(succ), PRIORITY_NTK_FORWARD, 'ntk'))

    for node_id, extra in (pinned or {}).items():
        if node_id not in upgrades:
            raise PolicyError(f"node {node_id} is not SDN-capable and cannot hold rules")
        rules[node_id].extend(extra)

    tables = {node_id: RuleTable.build(node_id, node_rules) for node_id, node_rules in sorted(rules.items())}
    logger.debug(f"[POLICY] Compiled {sum(len(t) for t in tables.values())} rules on {len(tables)} nodes, "
                 f"{len(coverage.uncovered)} flows uncovered")
    return tables, coverage


class WalkOutcome(str, Enum):
    DELIVERED = 'delivered'
    DROPPED = 'dropped'
    LOST = 'lost'
    LOOP = 'loop'


@dataclass
class FlowWalk:
    path: List[int]
    outcome: WalkOutcome


def current_link_states(topo: Topology) -> Dict[LinkKey, LinkState]:
    return {key: LinkState.UP if up else LinkState.DOWN for key, up in topo.link_states().items()}


def walk_flow(topo: Topology, upgrades: AbstractSet[int], tables: Mapping[int, RuleTable],
              header: Header, ttl: int = DEFAULT_TTL) -> FlowWalk:
    """Follow one packet through the rule tables and legacy forwarding"""
    states = current_link_states(topo)
    node = header.src
    path = [node]
    while node != header.dst:
        if len(path) > ttl:
            return FlowWalk(path, WalkOutcome.LOOP)
        action = match_rule(tables.get(node), header, states) if node in upgrades else RuleAction.legacy()
        if action.kind is ActionKind.DROP:
            return FlowWalk(path, WalkOutcome.DROPPED)
        if action.kind is ActionKind.FORWARD:
            next_hop = action.next_hop
        else:
            try:
                next_hop = legacy_next_hop(topo, node, header.dst)
            except UnreachableError:
                return FlowWalk(path, WalkOutcome.LOST)
        if not topo.link_up(node, next_hop):
            return FlowWalk(path, WalkOutcome.LOST)
        node = next_hop
        path.append(node)
    return FlowWalk(path, WalkOutcome.DELIVERED)


@dataclass(frozen=True)
class NtkViolation:
    flow: FlowSpec
    path: Tuple[int, ...]
    team: Optional[str]


def verify_ntk(topo: Topology, upgrades: AbstractSet[int], policy: NtkPolicy, flows: Iterable[FlowSpec],
               tables: Mapping[int, RuleTable], ttl: int = DEFAULT_TTL) -> List[NtkViolation]:
    """Every flow whose packet reaches a destination team lacking clearance"""
    violations = []
    for flow in dict.fromkeys(flows):
        access = policy.access_id(flow.category)
        try:
            walk = walk_flow(topo, upgrades, tables, Header(flow.src, flow.dst, access), ttl)
        except SmanetError as e:
            logger.warning(f"[POLICY] Walk of {flow.src}->{flow.dst} failed: {e.message}")
            continue
        team = topo.team_of(flow.dst)
        if walk.outcome is WalkOutcome.DELIVERED and not policy.is_cleared(team, access):
            violations.append(NtkViolation(flow, tuple(walk.path), team))
    return violations
