from .topology import Topology, NodeRecord, LinkRecord, NodeKind, LinkKey, link_key
from .routing import (
    Path, shortest_distances, legacy_next_hop, legacy_path, try_legacy_path,
    enumerate_simple_paths, validate_path, latency_distances,
    default_max_hops
)
from .events import TopologyEvent, EventKind, Reconfiguration, apply_event
