"""
Flow rules matching on (source id, destination id, access id) plus an
optional link-state predicate, and per-node rule tables ordered by priority
and specificity.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional, Tuple

from netmodel.topology import LinkKey, link_key
from utils.errors import RuleConflictError, SmanetError

# Priority bands
PRIORITY_NTK_DROP = 300
PRIORITY_FAILOVER = 250
PRIORITY_NTK_FORWARD = 100
PRIORITY_PRIMARY = 50


class LinkState(str, Enum):
    UP = 'UP'
    DOWN = 'DOWN'


class ActionKind(str, Enum):
    FORWARD = 'forward'
    DROP = 'drop'
    LEGACY = 'legacy'


@dataclass(frozen=True)
class StatePredicate:
    link: LinkKey
    state: LinkState

    def __post_init__(self):
        object.__setattr__(self, 'link', link_key(*self.link))

    def __str__(self) -> str:
        return f"{self.link[0]}-{self.link[1]}:{self.state.value}"


@dataclass(frozen=True)
class Header:
    src: int
    dst: int
    access_id: int = 0


@dataclass(frozen=True)
class RuleMatch:
    """None in a field is a wildcard"""
    src: Optional[int] = None
    dst: Optional[int] = None
    access_id: Optional[int] = None
    state: Optional[StatePredicate] = None

    @property
    def specificity(self) -> int:
        return sum(v is not None for v in (self.src, self.dst, self.access_id))

    def matches(self, header: Header) -> bool:
        return ((self.src is None or self.src == header.src)
                and (self.dst is None or self.dst == header.dst)
                and (self.access_id is None or self.access_id == header.access_id))

    def overlaps(self, other: 'RuleMatch') -> bool:
        """True when some header and link state satisfy both matches"""
        for mine, theirs in ((self.src, other.src), (self.dst, other.dst), (self.access_id, other.access_id)):
            if mine is not None and theirs is not None and mine != theirs:
                return False
        if self.state is None or other.state is None:
            return True
        return self.state.link != other.state.link or self.state.state is other.state.state

    def sort_key(self) -> tuple:
        def field_key(value):
            return (0, 0) if value is None else (1, value)
        state = (0, (), '') if self.state is None else (1, self.state.link, self.state.state.value)
        return (field_key(self.src), field_key(self.dst), field_key(self.access_id), state)

    def __str__(self) -> str:
        def show(value):
            return '*' if value is None else str(value)
        text = f"src={show(self.src)} dst={show(self.dst)} access={show(self.access_id)}"
        if self.state is not None:
            text += f" state={self.state}"
        return text


@dataclass(frozen=True)
class RuleAction:
    kind: ActionKind
    next_hop: Optional[int] = None

    @classmethod
    def forward(cls, next_hop: int) -> 'RuleAction':
        return cls(ActionKind.FORWARD, next_hop)

    @classmethod
    def drop(cls) -> 'RuleAction':
        return cls(ActionKind.DROP)

    @classmethod
    def legacy(cls) -> 'RuleAction':
        return cls(ActionKind.LEGACY)

    def __str__(self) -> str:
        if self.kind is ActionKind.FORWARD:
            return f"forward {self.next_hop}"
        return self.kind.value


LEGACY = RuleAction.legacy()


@dataclass(frozen=True)
class FlowRule:
    match: RuleMatch
    action: RuleAction
    priority: int
    origin: str = field(default='', compare=False)

    def __post_init__(self):
        if self.action.kind is ActionKind.LEGACY:
            raise SmanetError("a rule must forward or drop")
        if self.action.kind is ActionKind.FORWARD and self.action.next_hop is None:
            raise SmanetError("forward rule without next hop")
        if self.action.kind is ActionKind.DROP and self.action.next_hop is not None:
            raise SmanetError("drop rule cannot name a next hop")

    def sort_key(self) -> tuple:
        return (-self.priority, -self.match.specificity, self.match.sort_key())


@dataclass(frozen=True)
class RuleTable:
    node_id: int
    rules: Tuple[FlowRule, ...] = ()

    @classmethod
    def build(cls, node_id: int, rules: Iterable[FlowRule]) -> 'RuleTable':
        """
        Order rules by (priority desc, specificity desc, match) and drop exact
        duplicates. Two rules of equal priority and specificity whose matches
        overlap but whose actions differ cannot be ordered and raise
        RuleConflictError.
        """
        ordered = sorted(dict.fromkeys(rules), key=FlowRule.sort_key)
        for i, rule in enumerate(ordered):
            for other in ordered[i + 1:]:
                if (other.priority, other.match.specificity) != (rule.priority, rule.match.specificity):
                    break
                if other.action != rule.action and rule.match.overlaps(other.match):
                    raise RuleConflictError(node_id, f"[{rule.match}] and [{other.match}]",
                                            (str(rule.action), str(other.action)))
        return cls(node_id, tuple(ordered))

    def without(self, rule: FlowRule) -> 'RuleTable':
        return RuleTable(self.node_id, tuple(r for r in self.rules if r != rule))

    def __iter__(self) -> Iterator[FlowRule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)


def match_rule(table: Optional[RuleTable], header: Header,
               link_states: Optional[Mapping[LinkKey, LinkState]] = None) -> RuleAction:
    """
    Action of the first rule whose fields and state predicate hold, or LEGACY.

    A state predicate holds only when link_states reports exactly the required
    state for its link; an unknown link never satisfies a predicate.
    """
    if table is None:
        return LEGACY
    states = link_states or {}
    for rule in table.rules:
        if not rule.match.matches(header):
            continue
        predicate = rule.match.state
        if predicate is not None and states.get(predicate.link) is not predicate.state:
            continue
        return rule.action
    return LEGACY


def dump_tables(tables: Mapping[int, RuleTable]) -> str:
    """Deterministic text dump, one block per node in ascending id"""
    lines = []
    for node_id in sorted(tables):
        table = tables[node_id]
        lines.append(f"node {node_id} ({len(table)} rules)")
        if not table.rules:
            lines.append("  (empty)")
        for rule in table.rules:
            lines.append(f"  {rule.priority:>4} {rule.match} -> {rule.action}")
    return "\n".join(lines) + ("\n" if lines else "")
