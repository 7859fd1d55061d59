"""
Legacy (OLSR-like) routing semantics over a Topology.

Routes are minimum hop count; among equal-length next hops the lowest node id
wins, which makes every legacy route reproducible.
"""

from typing import Dict, List, Optional, Tuple

import networkx as nx

from netmodel.topology import Topology
from utils.errors import InvalidPathError, UnreachableError

Path = Tuple[int, ...]


def shortest_distances(topo: Topology, dst: int) -> Dict[int, Optional[int]]:
    """Hop distance of every node towards dst; None marks an unreachable node"""
    reached = topo.hop_distances(dst)
    return {node_id: reached.get(node_id) for node_id in topo.node_ids}


def legacy_next_hop(topo: Topology, at: int, dst: int) -> int:
    dist = topo.hop_distances(dst)
    topo.node(at)
    if at == dst:
        raise InvalidPathError(f"node {at} is already the destination")
    here = dist.get(at)
    if here is None:
        raise UnreachableError(at, dst)
    for u in topo.neighbors(at):
        if dist.get(u) == here - 1:
            return u
    # BFS guarantees a downstream neighbor
    raise UnreachableError(at, dst)


def legacy_path(topo: Topology, src: int, dst: int) -> Path:
    """Default route: the chain of legacy next hops from src to dst"""
    path = [src]
    node = src
    while node != dst:
        node = legacy_next_hop(topo, node, dst)
        path.append(node)
    return tuple(path)


def try_legacy_path(topo: Topology, src: int, dst: int) -> Optional[Path]:
    if src == dst or topo.hop_distances(dst).get(src) is None:
        return None
    return legacy_path(topo, src, dst)


def enumerate_simple_paths(topo: Topology, src: int, dst: int, max_hops: int) -> List[Path]:
    """All simple paths with at most max_hops edges, in lexicographic order"""
    topo.node(src)
    topo.node(dst)
    if src == dst:
        raise InvalidPathError("source and destination must differ")
    if max_hops < 1:
        raise InvalidPathError(f"max_hops must be >= 1, got {max_hops}")
    paths = nx.all_simple_paths(topo.graph, src, dst, cutoff=max_hops)
    return sorted(tuple(p) for p in paths)


def validate_path(topo: Topology, path: Path) -> None:
    """Raise InvalidPathError unless path is a simple path over up links"""
    if len(path) < 2:
        raise InvalidPathError(f"path {path} needs at least two nodes")
    if len(set(path)) != len(path):
        raise InvalidPathError(f"path {path} repeats a node")
    for node_id in path:
        if not topo.has_node(node_id):
            raise InvalidPathError(f"path {path} references unknown node {node_id}")
    for u, v in zip(path, path[1:]):
        if not topo.link_up(u, v):
            raise InvalidPathError(f"path {path} uses missing or down link {u}-{v}")


def latency_distances(topo: Topology, src: int) -> Dict[int, float]:
    """Latency-weighted shortest distances from src over up links; unreachable nodes are absent"""
    topo.node(src)
    return dict(nx.single_source_dijkstra_path_length(topo.graph, src, weight='latency'))


def default_max_hops(topo: Topology) -> int:
    """Path enumeration bound used when none is configured: diameter + 2"""
    return max(1, topo.diameter + 2)
