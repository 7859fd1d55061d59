"""
Selectable-path model for hybrid SDN deployments.

Legacy nodes forward strictly on their legacy next hop; SDN nodes may send a
packet to any neighbor. A path is selectable when every legacy node on it
(apart from the destination) agrees with the path.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import AbstractSet, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from netmodel.routing import Path, enumerate_simple_paths, legacy_next_hop, validate_path
from netmodel.topology import Topology

Pair = Tuple[int, int]


def override_points(topo: Topology, path: Path) -> FrozenSet[int]:
    """Nodes that must be SDN for the path to be realizable"""
    dst = path[-1]
    return frozenset(
        v for v, succ in zip(path, path[1:])
        if succ != legacy_next_hop(topo, v, dst)
    )


def is_selectable(topo: Topology, path: Path, upgrades: AbstractSet[int]) -> bool:
    validate_path(topo, path)
    return override_points(topo, path) <= set(upgrades)


@dataclass
class SelectabilityIndex:
    """
    Precomputed override requirements of every enumerated path.

    Evaluating the objective for a candidate upgrade set is then a subset test
    per distinct requirement set instead of a walk over every path.
    """
    topo: Topology
    pairs: Tuple[Pair, ...]
    max_hops: int
    requirements: Dict[Pair, Counter] = field(default_factory=dict)

    @classmethod
    def build(cls, topo: Topology, pairs: Iterable[Pair], max_hops: int) -> 'SelectabilityIndex':
        ordered = tuple(sorted(set(pairs)))
        index = cls(topo, ordered, max_hops)
        for src, dst in ordered:
            needed: Counter = Counter()
            if src != dst and topo.hop_distances(dst).get(src) is not None:
                for path in enumerate_simple_paths(topo, src, dst, max_hops):
                    needed[override_points(topo, path)] += 1
            index.requirements[(src, dst)] = needed
        return index

    def per_pair(self, upgrades: AbstractSet[int]) -> Dict[Pair, int]:
        chosen = frozenset(upgrades)
        return {
            pair: sum(count for needed, count in needed_counts.items() if needed <= chosen)
            for pair, needed_counts in self.requirements.items()
        }

    def value(self, upgrades: AbstractSet[int]) -> int:
        return sum(self.per_pair(upgrades).values())


def selectable_count(topo: Topology, upgrades: AbstractSet[int], pairs: Iterable[Pair], max_hops: int) -> int:
    return SelectabilityIndex.build(topo, pairs, max_hops).value(upgrades)


def secure_path(topo: Topology, upgrades: AbstractSet[int], src: int, dst: int,
                avoid: AbstractSet[int], max_hops: int) -> Optional[Path]:
    """
    Shortest selectable path from src to dst that avoids the given nodes
    (lexicographically smallest among equal lengths), or None.
    """
    if src in avoid or dst in avoid:
        return None
    chosen = set(upgrades)
    candidates: List[Path] = [
        p for p in enumerate_simple_paths(topo, src, dst, max_hops)
        if not (set(p) & set(avoid)) and override_points(topo, p) <= chosen
    ]
    if not candidates:
        return None
    return min(candidates, key=lambda p: (len(p), p))


def all_ordered_pairs(nodes: Sequence[int]) -> List[Pair]:
    return [(s, d) for s in nodes for d in nodes if s != d]
