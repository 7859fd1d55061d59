import heapq
import logging
import math
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import AbstractSet, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from config.config import config
from deployment.selectability import Pair, SelectabilityIndex
from netmodel.routing import default_max_hops
from netmodel.topology import Topology
from utils.errors import InstanceTooLargeError, SmanetError

logger = logging.getLogger(__name__)


@dataclass
class DeploymentPlan:
    """Nodes upgraded to SDN forwarding and the selectable-path count they achieve"""
    upgrades: FrozenSet[int]
    objective: int
    per_pair: Dict[Pair, int] = field(default_factory=dict)
    method: str = 'greedy'

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "upgrades": sorted(self.upgrades),
            "objective": self.objective,
            "per_pair": {f"{s}-{d}": n for (s, d), n in sorted(self.per_pair.items())},
        }


def _plan(index: SelectabilityIndex, upgrades: Iterable[int], method: str) -> DeploymentPlan:
    chosen = frozenset(upgrades)
    per_pair = index.per_pair(chosen)
    return DeploymentPlan(chosen, sum(per_pair.values()), per_pair, method)


def _team_allows(topo: Topology, chosen: Iterable[int], node_id: int,
                 team_budgets: Optional[Mapping[str, int]]) -> bool:
    if not team_budgets:
        return True
    team = topo.node(node_id).team
    if team not in team_budgets:
        return True
    used = sum(1 for n in chosen if topo.node(n).team == team)
    return used < team_budgets[team]


def _prepare(topo: Topology, budget: int, pairs: Iterable[Pair],
             max_hops: Optional[int]) -> SelectabilityIndex:
    if budget < 0:
        raise SmanetError(f"budget must be >= 0, got {budget}")
    hops = max_hops if max_hops is not None else default_max_hops(topo)
    return SelectabilityIndex.build(topo, pairs, hops)


def _warn_if_stalled(topo: Topology, index: SelectabilityIndex, chosen: AbstractSet[int],
                     budget: int, current: int, method: str) -> None:
    """Warn when a greedy stop leaves budget unspent while joint upgrades could still add paths"""
    if len(chosen) >= budget:
        return
    ceiling = index.value(set(topo.node_ids))
    if ceiling > current:
        logger.warning(f"[DEPLOY] {method} stopped at objective {current} with {budget - len(chosen)} upgrades "
                       f"unspent; {ceiling - current} paths need several nodes upgraded together")


def greedy_deploy(topo: Topology, budget: int, pairs: Iterable[Pair],
                  max_hops: Optional[int] = None,
                  team_budgets: Optional[Mapping[str, int]] = None) -> DeploymentPlan:
    """
    Repeatedly upgrade the node with the largest marginal gain (lowest id on
    ties) until the budget is spent or no node adds a selectable path.

    The (1 - 1/e) guarantee of greedy selection does not hold here: a path
    needing two overrides shows no gain for either node alone.
    """
    index = _prepare(topo, budget, pairs, max_hops)
    chosen: set = set()
    current = index.value(chosen)
    while len(chosen) < budget:
        best_gain, best_node = 0, None
        for node_id in topo.node_ids:
            if node_id in chosen or not _team_allows(topo, chosen, node_id, team_budgets):
                continue
            gain = index.value(chosen | {node_id}) - current
            if gain > best_gain:
                best_gain, best_node = gain, node_id
        if best_node is None:
            logger.debug(f"[DEPLOY] No positive marginal gain left after {sorted(chosen)}")
            break
        chosen.add(best_node)
        current += best_gain
        logger.debug(f"[DEPLOY] Upgrading node {best_node} (+{best_gain}, objective {current})")
    _warn_if_stalled(topo, index, chosen, budget, current, "greedy")
    return _plan(index, chosen, 'greedy')


def lazy_greedy_deploy(topo: Topology, budget: int, pairs: Iterable[Pair],
                       max_hops: Optional[int] = None,
                       team_budgets: Optional[Mapping[str, int]] = None) -> DeploymentPlan:
    """
    Greedy with lazily re-evaluated marginal gains kept in a heap of upper
    bounds. Identical to greedy_deploy when the objective is submodular.
    """
    index = _prepare(topo, budget, pairs, max_hops)
    chosen: set = set()
    current = index.value(chosen)
    bounds = [(-(index.value({n}) - current), n) for n in topo.node_ids]
    heapq.heapify(bounds)
    while bounds and len(chosen) < budget:
        _, node_id = heapq.heappop(bounds)
        if not _team_allows(topo, chosen, node_id, team_budgets):
            continue
        gain = index.value(chosen | {node_id}) - current
        # Accept when the fresh gain still beats the best stale bound
        if not bounds or (-gain, node_id) <= bounds[0]:
            if gain <= 0:
                break
            chosen.add(node_id)
            current += gain
            logger.debug(f"[DEPLOY] Lazy pick {node_id} (+{gain}, objective {current})")
        else:
            heapq.heappush(bounds, (-gain, node_id))
    _warn_if_stalled(topo, index, chosen, budget, current, "lazy greedy")
    return _plan(index, chosen, 'lazy-greedy')


def _subset_count(n: int, budget: int) -> int:
    return sum(math.comb(n, k) for k in range(0, min(budget, n) + 1))


def brute_force_deploy(topo: Topology, budget: int, pairs: Iterable[Pair],
                       max_hops: Optional[int] = None,
                       team_budgets: Optional[Mapping[str, int]] = None,
                       cap: Optional[int] = None) -> DeploymentPlan:
    """
    Exact optimum over every subset of size <= budget. Ties go to the fewest
    upgrades, then to the lexicographically first set.
    """
    index = _prepare(topo, budget, pairs, max_hops)
    cap = cap if cap is not None else config.enumeration_cap
    nodes = topo.node_ids
    needed = _subset_count(len(nodes), budget)
    if needed > cap:
        raise InstanceTooLargeError(needed, cap)
    best_key, best_set = None, ()
    for size in range(0, min(budget, len(nodes)) + 1):
        for subset in combinations(nodes, size):
            if team_budgets and not _within_team_budgets(topo, subset, team_budgets):
                continue
            key = (-index.value(set(subset)), len(subset), subset)
            if best_key is None or key < best_key:
                best_key, best_set = key, subset
    return _plan(index, best_set, 'brute-force')


def _within_team_budgets(topo: Topology, subset: Sequence[int], team_budgets: Mapping[str, int]) -> bool:
    used: Dict[str, int] = {}
    for node_id in subset:
        team = topo.node(node_id).team
        used[team] = used.get(team, 0) + 1
    return all(used.get(team, 0) <= limit for team, limit in team_budgets.items())


@dataclass
class SubmodularityReport:
    samples: int
    monotonicity_violations: List[Tuple[FrozenSet[int], FrozenSet[int]]] = field(default_factory=list)
    submodularity_violations: List[Tuple[FrozenSet[int], FrozenSet[int], int]] = field(default_factory=list)

    @property
    def is_monotone(self) -> bool:
        return not self.monotonicity_violations

    @property
    def is_submodular(self) -> bool:
        return not self.submodularity_violations


def check_submodularity(topo: Topology, pairs: Iterable[Pair], max_hops: Optional[int] = None,
                        samples: int = 1000, seed: int = 0) -> SubmodularityReport:
    """
    Sample (S subset of T, v outside T) triples and test monotonicity and
    diminishing returns of the selectable-path count. Every counterexample is
    kept in the report and logged.
    """
    index = _prepare(topo, 0, pairs, max_hops)
    rng = random.Random(seed)
    nodes = topo.node_ids
    report = SubmodularityReport(samples)
    if len(nodes) < 2:
        return report
    taken = 0
    while taken < samples:
        big = frozenset(n for n in nodes if rng.random() < 0.5)
        outside = [n for n in nodes if n not in big]
        if not outside:
            continue
        small = frozenset(n for n in big if rng.random() < 0.5)
        v = rng.choice(outside)
        taken += 1
        f_small, f_big = index.value(small), index.value(big)
        if f_small > f_big:
            report.monotonicity_violations.append((small, big))
            logger.warning(f"[DEPLOY] Monotonicity violated: f({sorted(small)})={f_small} > f({sorted(big)})={f_big}")
        gain_small = index.value(small | {v}) - f_small
        gain_big = index.value(big | {v}) - f_big
        if gain_small < gain_big:
            report.submodularity_violations.append((small, big, v))
            logger.debug(f"[DEPLOY] Diminishing returns violated: S={sorted(small)} T={sorted(big)} v={v} "
                         f"gains {gain_small} < {gain_big}")
    if report.submodularity_violations:
        small, big, v = report.submodularity_violations[0]
        logger.warning(f"[DEPLOY] {len(report.submodularity_violations)}/{samples} sampled triples violate "
                       f"submodularity (first: S={sorted(small)} T={sorted(big)} v={v})")
    return report


@dataclass
class RedeployStep:
    index: int
    plan: DeploymentPlan
    added: FrozenSet[int]
    removed: FrozenSet[int]


def redeploy(snapshots: Sequence[Topology], budget: int, pairs: Iterable[Pair],
             max_hops: Optional[int] = None,
             team_budgets: Optional[Mapping[str, int]] = None) -> List[RedeployStep]:
    """Re-run greedy_deploy on each mobility snapshot and report upgrade churn"""
    pairs = list(pairs)
    steps: List[RedeployStep] = []
    previous: FrozenSet[int] = frozenset()
    for i, snapshot in enumerate(snapshots):
        plan = greedy_deploy(snapshot, budget, pairs, max_hops, team_budgets)
        steps.append(RedeployStep(i, plan, plan.upgrades - previous, previous - plan.upgrades))
        if i and (plan.upgrades != previous):
            logger.info(f"[DEPLOY] Snapshot {i}: re-arrangement adds {sorted(plan.upgrades - previous)}, "
                        f"removes {sorted(previous - plan.upgrades)}")
        previous = plan.upgrades
    return steps
