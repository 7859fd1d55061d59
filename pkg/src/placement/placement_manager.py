import logging
import math
import random
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from config.config import config
from netmodel.topology import Topology
from placement.placement_cost import (
    CostWeights, Organization, Placement, assign_forwarders, choose_root,
    forwarders_of, placement_cost
)
from utils.errors import (
    InstanceTooLargeError, InvalidPlacementError, PlacementInfeasibleError
)

logger = logging.getLogger(__name__)

# Sort key of an evaluated site set: feasible first, most forwarders served,
# cheapest, then lexicographically smallest sites
PlacementKey = Tuple[int, int, float, Tuple[int, ...]]


class _Evaluator:
    """Memoized placement construction and scoring for one search"""

    def __init__(self, topo: Topology, capacity: int, weights: CostWeights,
                 organization: Organization, root: Optional[int], control_energy: float):
        self.topo = topo
        self.capacity = capacity
        self.weights = CostWeights(*weights)
        self.organization = organization
        self.root = root
        self.control_energy = control_energy
        self._cache: Dict[FrozenSet[int], Tuple[PlacementKey, Optional[Placement]]] = {}

    def evaluate(self, sites: Iterable[int]) -> Tuple[PlacementKey, Optional[Placement]]:
        chosen = frozenset(sites)
        if chosen not in self._cache:
            self._cache[chosen] = self._build(chosen)
        return self._cache[chosen]

    def key(self, sites: Iterable[int]) -> PlacementKey:
        return self.evaluate(sites)[0]

    def _build(self, chosen: FrozenSet[int]) -> Tuple[PlacementKey, Optional[Placement]]:
        ordered = tuple(sorted(chosen))
        infeasible = (1, 0, math.inf, ordered)
        if not chosen:
            return infeasible, None
        assignment = assign_forwarders(self.topo, ordered, self.capacity)
        root = None
        if self.organization is Organization.HIERARCHICAL:
            root = self.root if self.root is not None else choose_root(self.topo, ordered)
        placement = Placement(ordered, self.organization, assignment.mapping, self.capacity,
                              root, tuple(assignment.unassigned))
        try:
            placement.cost = placement_cost(self.topo, placement, self.weights, self.control_energy)
        except InvalidPlacementError as e:
            logger.debug(f"[PLACEMENT] Sites {ordered} rejected: {e.message}")
            return infeasible, None
        # Compare on a rounded total so float noise cannot break ties
        key = (0, -len(assignment.mapping), round(placement.cost.total, 9), ordered)
        return key, placement


def _check_candidates(topo: Topology, candidates: Optional[Sequence[int]]) -> List[int]:
    chosen = sorted(set(candidates)) if candidates is not None else topo.candidates
    for node_id in chosen:
        if not topo.node(node_id).controller_candidate:
            raise InvalidPlacementError(f"node {node_id} is not a controller candidate")
    if not chosen:
        raise PlacementInfeasibleError("no controller candidates")
    return chosen


def _check_feasible(topo: Topology, max_sites: int, capacity: int) -> None:
    if max_sites < 1:
        raise PlacementInfeasibleError(f"max_sites must be >= 1, got {max_sites}")
    needed = len(forwarders_of(topo))
    if capacity * max_sites < needed:
        raise PlacementInfeasibleError(
            f"capacity {capacity} x {max_sites} sites cannot serve {needed} forwarders")


def exhaustive_place(topo: Topology, candidates: Optional[Sequence[int]], max_sites: int, capacity: int,
                     weights: CostWeights = CostWeights(), organization: Organization = Organization.FLAT,
                     root: Optional[int] = None, control_energy: float = 1.0,
                     cap: Optional[int] = None) -> Placement:
    """Cheapest placement over every site subset of size <= max_sites"""
    pool = _check_candidates(topo, candidates)
    _check_feasible(topo, max_sites, capacity)
    cap = cap if cap is not None else config.enumeration_cap
    limit = min(max_sites, len(pool))
    subsets = sum(math.comb(len(pool), k) for k in range(1, limit + 1))
    if subsets > cap:
        raise InstanceTooLargeError(subsets, cap)

    evaluator = _Evaluator(topo, capacity, weights, organization, root, control_energy)
    best = min(
        (evaluator.evaluate(sites) for k in range(1, limit + 1) for sites in combinations(pool, k)),
        key=lambda scored: scored[0],
    )
    if best[1] is None:
        raise PlacementInfeasibleError("no site subset yields a valid placement")
    logger.debug(f"[PLACEMENT] Exhaustive search over {subsets} subsets chose {best[1].sites}")
    return best[1]


def _greedy_open(evaluator: _Evaluator, pool: List[int], max_sites: int) -> FrozenSet[int]:
    current: FrozenSet[int] = frozenset()
    current_key = evaluator.key(current)
    while len(current) < max_sites:
        options = [current | {site} for site in pool if site not in current]
        if not options:
            break
        step = min(options, key=evaluator.key)
        if evaluator.key(step) >= current_key:
            break
        current, current_key = step, evaluator.key(step)
    return current


def _neighborhood(current: FrozenSet[int], pool: List[int], max_sites: int) -> List[FrozenSet[int]]:
    outside = [site for site in pool if site not in current]
    moves = [current - {a} | {b} for a in sorted(current) for b in outside]
    if len(current) < max_sites:
        moves.extend(current | {b} for b in outside)
    if len(current) > 1:
        moves.extend(current - {a} for a in sorted(current))
    return moves


def _improve(evaluator: _Evaluator, start: FrozenSet[int], pool: List[int], max_sites: int) -> FrozenSet[int]:
    current = start
    while True:
        moves = _neighborhood(current, pool, max_sites)
        if not moves:
            return current
        best = min(moves, key=evaluator.key)
        # Stop on an equal-cost plateau
        if evaluator.key(best)[:3] >= evaluator.key(current)[:3]:
            return current
        current = best


def local_search_place(topo: Topology, candidates: Optional[Sequence[int]], max_sites: int, capacity: int,
                       weights: CostWeights = CostWeights(), organization: Organization = Organization.FLAT,
                       seed: int = 0, root: Optional[int] = None, control_energy: float = 1.0) -> Placement:
    """
    Facility-location heuristic.

    Greedy opening followed by best-improvement swap/open/close moves,
    restarted from each single candidate. The best local optimum wins; when
    several site sets reach the same cost, the seed picks among them.
    """
    pool = _check_candidates(topo, candidates)
    _check_feasible(topo, max_sites, capacity)
    evaluator = _Evaluator(topo, capacity, weights, organization, root, control_energy)
    rng = random.Random(seed)

    starts = [_greedy_open(evaluator, pool, max_sites)] + [frozenset({site}) for site in pool]
    optima = {_improve(evaluator, start, pool, max_sites) for start in starts if start}
    ranked = sorted(evaluator.key(sites) for sites in optima)
    # Key prefix without the site tuple: feasibility, forwarders served, cost
    tied = [key for key in ranked if key[:3] == ranked[0][:3]]
    if len(tied) > 1:
        logger.debug(f"[PLACEMENT] {len(tied)} local optima share total {ranked[0][2]}; seed {seed} picks one")
    _, best = evaluator.evaluate(rng.choice(tied)[3])
    if best is None:
        raise PlacementInfeasibleError("local search found no valid placement")
    logger.debug(f"[PLACEMENT] Local search (seed {seed}) settled on {best.sites}, total {best.cost.total:.3f}")
    return best


def best_organization(topo: Topology, candidates: Optional[Sequence[int]], max_sites: int, capacity: int,
                      weights: CostWeights = CostWeights(), root: Optional[int] = None,
                      control_energy: float = 1.0, seed: Optional[int] = None) -> Placement:
    """Solve for both organizations and keep the cheaper (flat on ties); seed selects local search"""
    results = []
    for organization in (Organization.FLAT, Organization.HIERARCHICAL):
        if seed is None:
            results.append(exhaustive_place(topo, candidates, max_sites, capacity, weights,
                                            organization, root, control_energy))
        else:
            results.append(local_search_place(topo, candidates, max_sites, capacity, weights,
                                              organization, seed, root, control_energy))
    flat, hier = results
    chosen = hier if hier.cost.total < flat.cost.total else flat
    logger.info(f"[PLACEMENT] flat total {flat.cost.total:.3f}, hierarchical total {hier.cost.total:.3f}: "
                f"using {chosen.organization.value}")
    return chosen


def solve_placement(topo: Topology, candidates: Optional[Sequence[int]], max_sites: int, capacity: int,
                    weights: CostWeights = CostWeights(), organization: Organization = Organization.FLAT,
                    seed: int = 0, root: Optional[int] = None, control_energy: float = 1.0) -> Placement:
    """Exact search when the enumeration cap allows it, local search otherwise"""
    try:
        return exhaustive_place(topo, candidates, max_sites, capacity, weights, organization, root, control_energy)
    except InstanceTooLargeError as e:
        logger.info(f"[PLACEMENT] {e.message}; falling back to local search")
        return local_search_place(topo, candidates, max_sites, capacity, weights, organization,
                                  seed, root, control_energy)
