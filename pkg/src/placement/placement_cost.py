"""
Controller placement model: sites, forwarder assignment and the weighted
latency / synchronization / energy cost of a placement.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

from netmodel.routing import latency_distances
from netmodel.topology import NodeKind, Topology
from utils.errors import InvalidPlacementError, SmanetError

logger = logging.getLogger(__name__)


class Organization(str, Enum):
    FLAT = 'flat'
    HIERARCHICAL = 'hierarchical'

    @classmethod
    def parse(cls, text: str) -> 'Organization':
        value = text.strip().lower()
        if value in ('hier', 'hierarchical'):
            return cls.HIERARCHICAL
        if value == 'flat':
            return cls.FLAT
        raise SmanetError(f"unknown organization '{text}' (expected flat or hier)")


class CostWeights(NamedTuple):
    latency: float = 1.0
    sync: float = 1.0
    energy: float = 1.0


@dataclass(frozen=True)
class PlacementCost:
    control_latency: float
    sync_cost: float
    energy_penalty: float
    total: float

    def to_dict(self) -> dict:
        return {
            "control_latency": self.control_latency,
            "sync_cost": self.sync_cost,
            "energy_penalty": self.energy_penalty,
            "total": self.total,
        }


@dataclass
class Assignment:
    """Forwarder to site mapping plus the forwarders that could not be placed"""
    mapping: Dict[int, int] = field(default_factory=dict)
    unassigned: List[int] = field(default_factory=list)


@dataclass
class Placement:
    sites: Tuple[int, ...]
    organization: Organization
    assignment: Dict[int, int]
    capacity: int
    root: Optional[int] = None
    unassigned: Tuple[int, ...] = ()
    cost: Optional[PlacementCost] = None

    def site_of(self, node_id: int) -> Optional[int]:
        return self.assignment.get(node_id)

    def load(self) -> Dict[int, int]:
        counts = {site: 0 for site in self.sites}
        for site in self.assignment.values():
            counts[site] = counts.get(site, 0) + 1
        return counts

    def to_dict(self) -> dict:
        return {
            "organization": self.organization.value,
            "sites": list(self.sites),
            "root": self.root,
            "capacity": self.capacity,
            "assignment": {str(f): s for f, s in sorted(self.assignment.items())},
            "unassigned": list(self.unassigned),
            "cost": self.cost.to_dict() if self.cost else None,
        }


def forwarders_of(topo: Topology) -> List[int]:
    """Data plane nodes that need a controller (everything except cloudlets)"""
    return [n.id for n in topo.nodes if n.kind is not NodeKind.CLOUDLET]


def _site_distances(topo: Topology, sites: Iterable[int]) -> Dict[int, Dict[int, float]]:
    return {site: latency_distances(topo, site) for site in sites}


def assign_forwarders(topo: Topology, sites: Iterable[int], capacity: int,
                      forwarders: Optional[Iterable[int]] = None) -> Assignment:
    """
    Nearest-site assignment with capacity.

    Forwarders are handled in ascending id order; each takes the closest
    reachable site (latency-weighted) that still has room, the lower site id
    winning ties. A site hosting a forwarder role assigns itself at distance 0.
    """
    sites = sorted(set(sites))
    if not sites:
        raise InvalidPlacementError("at least one controller site is required")
    if capacity < 1:
        raise InvalidPlacementError(f"capacity must be >= 1, got {capacity}")
    dist = _site_distances(topo, sites)
    remaining = {site: capacity for site in sites}
    result = Assignment()
    for fwd in sorted(forwarders if forwarders is not None else forwarders_of(topo)):
        options = [
            (dist[site][fwd], site) for site in sites
            if remaining[site] > 0 and fwd in dist[site]
        ]
        if not options:
            result.unassigned.append(fwd)
            continue
        _, site = min(options)
        result.mapping[fwd] = site
        remaining[site] -= 1
    if result.unassigned:
        logger.debug(f"[PLACEMENT] Sites {sites} leave forwarders {result.unassigned} unassigned")
    return result


def choose_root(topo: Topology, sites: Iterable[int]) -> int:
    """Global controller for a hierarchy: a cloudlet when one exists, else the most central site"""
    cloudlets = [n.id for n in topo.nodes if n.kind is NodeKind.CLOUDLET]
    if cloudlets:
        return cloudlets[0]
    sites = sorted(set(sites))
    if not sites:
        raise InvalidPlacementError("cannot choose a root without sites")
    dist = _site_distances(topo, sites)

    def spread(site: int) -> float:
        return sum(dist[site].get(other, float('inf')) for other in sites if other != site)

    return min(sites, key=lambda s: (spread(s), s))


def validate_placement(topo: Topology, placement: Placement) -> None:
    for site in placement.sites:
        if not topo.node(site).controller_candidate:
            raise InvalidPlacementError(f"site {site} is not a controller candidate")
    if placement.organization is Organization.HIERARCHICAL:
        if placement.root is None:
            raise InvalidPlacementError("hierarchical organization needs a root controller")
        root = topo.node(placement.root)
        if placement.root not in placement.sites and root.kind is not NodeKind.CLOUDLET:
            raise InvalidPlacementError(f"root {placement.root} is neither a site nor a cloudlet")
    for fwd, site in placement.assignment.items():
        topo.node(fwd)
        if site not in placement.sites:
            raise InvalidPlacementError(f"forwarder {fwd} assigned to non-site {site}")
    for site, count in placement.load().items():
        if count > placement.capacity:
            raise InvalidPlacementError(f"site {site} serves {count} forwarders, capacity is {placement.capacity}")
    dist = _site_distances(topo, placement.sites)
    for fwd in forwarders_of(topo):
        if fwd in placement.assignment:
            continue
        if any(fwd in dist[site] for site in placement.sites):
            raise InvalidPlacementError(f"forwarder {fwd} is reachable from a site but unassigned")


def placement_cost(topo: Topology, placement: Placement, weights: CostWeights = CostWeights(),
                   control_energy: float = 1.0) -> PlacementCost:
    """
    Weighted cost of a placement.

    control_latency is the mean forwarder-to-site latency; sync_cost sums the
    pairwise site latencies (flat) or each site's latency to the root
    (hierarchical); energy_penalty charges battery-powered sites per
    forwarder they serve.
    """
    if any(w < 0 for w in weights):
        raise InvalidPlacementError(f"cost weights must be non-negative, got {tuple(weights)}")
    validate_placement(topo, placement)

    dist = _site_distances(topo, placement.sites)
    if placement.assignment:
        control_latency = sum(dist[site][fwd] for fwd, site in placement.assignment.items()) / len(placement.assignment)
    else:
        control_latency = 0.0

    sync_cost = 0.0
    if placement.organization is Organization.FLAT:
        for a, b in combinations(placement.sites, 2):
            if b not in dist[a]:
                raise InvalidPlacementError(f"sites {a} and {b} cannot synchronize (disconnected)")
            sync_cost += dist[a][b]
    else:
        to_root = latency_distances(topo, placement.root)
        for site in placement.sites:
            if site == placement.root:
                continue
            if site not in to_root:
                raise InvalidPlacementError(f"site {site} cannot reach root {placement.root}")
            sync_cost += to_root[site]

    energy_penalty = 0.0
    load = placement.load()
    for site in placement.sites:
        if topo.node(site).battery_powered:
            energy_penalty += load.get(site, 0) * control_energy

    total = (weights.latency * control_latency
             + weights.sync * sync_cost
             + weights.energy * energy_penalty)
    return PlacementCost(control_latency, sync_cost, energy_penalty, total)


def controller_path_latency(topo: Topology, placement: Placement, node_id: int) -> Optional[float]:
    """Latency from a forwarder to its assigned controller on this topology; None when cut off"""
    site = placement.site_of(node_id)
    if site is None:
        return None
    return latency_distances(topo, node_id).get(site)
