from dataclasses import dataclass
from enum import Enum
from typing import Optional

from netmodel.topology import LinkKey, Topology, link_key
from utils.errors import SmanetError


class EventKind(str, Enum):
    LINK_DOWN = 'link_down'
    LINK_UP = 'link_up'
    NODE_COMPROMISED = 'node_compromised'
    NODE_RESTORED = 'node_restored'

    @property
    def is_link_event(self) -> bool:
        return self in (EventKind.LINK_DOWN, EventKind.LINK_UP)


@dataclass(frozen=True)
class TopologyEvent:
    """A timeline entry that mutates the topology (mobility, failures, compromise)"""
    time_ms: float
    kind: EventKind
    a: int
    b: Optional[int] = None

    def __post_init__(self):
        if self.kind.is_link_event and self.b is None:
            raise SmanetError(f"{self.kind.value} needs two endpoints")
        if not self.kind.is_link_event and self.b is not None:
            raise SmanetError(f"{self.kind.value} takes a single node")

    @property
    def link(self) -> LinkKey:
        return link_key(self.a, self.b)

    @classmethod
    def link_down(cls, a: int, b: int, time_ms: float = 0.0) -> 'TopologyEvent':
        return cls(time_ms, EventKind.LINK_DOWN, a, b)

    @classmethod
    def link_up(cls, a: int, b: int, time_ms: float = 0.0) -> 'TopologyEvent':
        return cls(time_ms, EventKind.LINK_UP, a, b)


@dataclass(frozen=True)
class Reconfiguration:
    """Scheduled reconfiguration of one node (e.g. a gateway switch)"""
    time_ms: float
    node: int


def apply_event(topo: Topology, ev: TopologyEvent) -> Topology:
    """
    Apply one event and return the new topology (version + 1).

    Repeating a link state (down on a down link, up on an up link) is
    idempotent apart from the version bump.
    """
    if ev.kind is EventKind.LINK_DOWN:
        return topo.with_link_state(ev.a, ev.b, up=False)
    if ev.kind is EventKind.LINK_UP:
        return topo.with_link_state(ev.a, ev.b, up=True)
    if ev.kind is EventKind.NODE_COMPROMISED:
        return topo.with_compromised(ev.a, True)
    return topo.with_compromised(ev.a, False)
