import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import networkx as nx

from utils.errors import SmanetError, UnknownLinkError, UnknownNodeError

LinkKey = Tuple[int, int]


def link_key(a: int, b: int) -> LinkKey:
    """Canonical (low, high) key for an undirected link"""
    return (a, b) if a < b else (b, a)


class NodeKind(str, Enum):
    SOLDIER = 'soldier'
    VEHICLE = 'vehicle'
    PORTABLE_STATION = 'portable-station'
    CLOUDLET = 'cloudlet'


@dataclass(frozen=True)
class NodeRecord:
    """A data plane node: soldier equipment, vehicle, portable station or cloudlet"""
    id: int
    kind: NodeKind = NodeKind.SOLDIER
    team: Optional[str] = None
    sdn_capable: bool = False
    controller_candidate: bool = False
    battery: float = math.inf
    power_bank: bool = False

    def __post_init__(self):
        if not isinstance(self.id, int) or self.id <= 0:
            raise SmanetError(f"node id must be a positive integer, got {self.id!r}")
        if self.battery < 0:
            raise SmanetError(f"node {self.id}: battery must be >= 0")
        if self.kind is NodeKind.CLOUDLET and not math.isinf(self.battery):
            raise SmanetError(f"node {self.id}: a cloudlet has unbounded battery")

    @property
    def battery_powered(self) -> bool:
        """True when controller work drains this node's own battery"""
        return not math.isinf(self.battery) and not self.power_bank


@dataclass(frozen=True)
class LinkRecord:
    a: int
    b: int
    latency: float
    up: bool = True

    def __post_init__(self):
        if self.a == self.b:
            raise SmanetError(f"self-loop on node {self.a}")
        if not self.latency > 0:
            raise SmanetError(f"link {self.a}-{self.b}: latency must be > 0")
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, 'a', a)
            object.__setattr__(self, 'b', b)

    @property
    def key(self) -> LinkKey:
        return (self.a, self.b)

    def other(self, node_id: int) -> int:
        return self.b if node_id == self.a else self.a


@dataclass(frozen=True)
class Topology:
    """
    Immutable network graph.

    Every mutation helper returns a new value; derived data (graphs, hop
    distances) is memoized per instance, so a topology can be shared freely
    between workers.
    """
    nodes: Tuple[NodeRecord, ...]
    links: Tuple[LinkRecord, ...]
    version: int = 0
    compromised: FrozenSet[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'nodes', tuple(sorted(self.nodes, key=lambda n: n.id)))
        object.__setattr__(self, 'links', tuple(sorted(self.links, key=lambda l: l.key)))
        object.__setattr__(self, 'compromised', frozenset(self.compromised))
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise SmanetError("duplicate node id")
        known = set(ids)
        seen = set()
        for link in self.links:
            for end in link.key:
                if end not in known:
                    raise UnknownNodeError(end)
            if link.key in seen:
                raise SmanetError(f"duplicate link {link.a}-{link.b}")
            seen.add(link.key)
        for node_id in self.compromised:
            if node_id not in known:
                raise UnknownNodeError(node_id)

    @classmethod
    def build(cls, nodes: Iterable[NodeRecord], links: Iterable[Tuple[int, int, float]]) -> 'Topology':
        return cls(tuple(nodes), tuple(LinkRecord(a, b, lat) for a, b, lat in links))

    # Lookups

    @cached_property
    def _node_index(self) -> Dict[int, NodeRecord]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def _link_index(self) -> Dict[LinkKey, LinkRecord]:
        return {l.key: l for l in self.links}

    @cached_property
    def _hop_cache(self) -> Dict[int, Dict[int, int]]:
        return {}

    @property
    def node_ids(self) -> List[int]:
        return [n.id for n in self.nodes]

    def has_node(self, node_id: int) -> bool:
        return node_id in self._node_index

    def node(self, node_id: int) -> NodeRecord:
        try:
            return self._node_index[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def has_link(self, a: int, b: int) -> bool:
        return link_key(a, b) in self._link_index

    def link(self, a: int, b: int) -> LinkRecord:
        try:
            return self._link_index[link_key(a, b)]
        except KeyError:
            raise UnknownLinkError(a, b) from None

    def link_up(self, a: int, b: int) -> bool:
        link = self._link_index.get(link_key(a, b))
        return link is not None and link.up

    def neighbors(self, node_id: int) -> List[int]:
        """Neighbors over up links, ascending id"""
        self.node(node_id)
        return sorted(self.graph.neighbors(node_id))

    def incident_links(self, node_id: int) -> List[LinkKey]:
        return [l.key for l in self.links if node_id in l.key]

    @property
    def sdn_nodes(self) -> FrozenSet[int]:
        return frozenset(n.id for n in self.nodes if n.sdn_capable)

    @property
    def candidates(self) -> List[int]:
        return [n.id for n in self.nodes if n.controller_candidate]

    @property
    def teams(self) -> Dict[str, List[int]]:
        teams: Dict[str, List[int]] = {}
        for n in self.nodes:
            if n.team is not None:
                teams.setdefault(n.team, []).append(n.id)
        return teams

    def team_of(self, node_id: int) -> Optional[str]:
        return self.node(node_id).team

    # Graph views

    @cached_property
    def graph(self) -> nx.Graph:
        """Undirected graph of the up links, latency on each edge"""
        g = nx.Graph()
        g.add_nodes_from(self.node_ids)
        g.add_edges_from((l.a, l.b, {'latency': l.latency}) for l in self.links if l.up)
        return g

    def hop_distances(self, dst: int) -> Dict[int, int]:
        """BFS hop counts towards dst over up links; unreachable nodes are absent"""
        self.node(dst)
        cached = self._hop_cache.get(dst)
        if cached is None:
            cached = dict(nx.single_source_shortest_path_length(self.graph, dst))
            self._hop_cache[dst] = cached
        return cached

    @cached_property
    def diameter(self) -> int:
        """Largest finite hop distance between any two nodes"""
        best = 0
        for node_id in self.node_ids:
            dist = self.hop_distances(node_id)
            if dist:
                best = max(best, max(dist.values()))
        return best

    # Functional updates

    def with_link_state(self, a: int, b: int, up: bool) -> 'Topology':
        key = self.link(a, b).key
        links = tuple(replace(l, up=up) if l.key == key else l for l in self.links)
        return replace(self, links=links, version=self.version + 1)

    def without_links(self, keys: Iterable[LinkKey]) -> 'Topology':
        """Copy with the given links marked down (version unchanged)"""
        down = {link_key(*k) for k in keys}
        for key in down:
            self.link(*key)
        links = tuple(replace(l, up=False) if l.key in down else l for l in self.links)
        return replace(self, links=links)

    def with_compromised(self, node_id: int, compromised: bool) -> 'Topology':
        self.node(node_id)
        marked = set(self.compromised)
        if compromised:
            marked.add(node_id)
        else:
            marked.discard(node_id)
        return replace(self, compromised=frozenset(marked), version=self.version + 1)

    def with_upgrades(self, upgrades: Iterable[int]) -> 'Topology':
        """Copy whose sdn_capable flags are exactly the given set"""
        chosen = set(upgrades)
        for node_id in chosen:
            self.node(node_id)
        nodes = tuple(replace(n, sdn_capable=n.id in chosen) for n in self.nodes)
        return replace(self, nodes=nodes)

    def link_states(self) -> Mapping[LinkKey, bool]:
        return {l.key: l.up for l in self.links}

