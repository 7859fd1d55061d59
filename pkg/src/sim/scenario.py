import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from netmodel.events import EventKind, Reconfiguration, TopologyEvent
from netmodel.topology import LinkKey, Topology, link_key
from placement.placement_cost import CostWeights, Organization, Placement
from policy.ntk_policy import FlowSpec, NtkPolicy
from utils.errors import ScenarioInvalidError, SmanetError


class ReactionMode(str, Enum):
    CENTRALIZED = 'centralized'
    MANET_BACKUP = 'manet-backup'
    DELEGATED = 'delegated'


def _tokens(value) -> list:
    if isinstance(value, str):
        return value.replace(',', ' ').split()
    return list(value)


class SimParams(BaseModel):
    """Per-scenario knobs from the [params] section"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    mode: ReactionMode = ReactionMode.CENTRALIZED
    seed: int = 0
    detection_delay_ms: float = Field(50.0, ge=0)
    convergence_ms: float = Field(2000.0, ge=0)
    recompute_ms: float = Field(100.0, ge=0)
    ttl: int = Field(32, ge=1)
    max_hops: Optional[int] = Field(None, ge=1)
    budget: Optional[int] = Field(None, ge=0)
    team_budgets: Optional[Dict[str, int]] = None
    max_sites: int = Field(1, ge=1)
    capacity: Optional[int] = Field(None, ge=1)
    organization: Organization = Organization.FLAT
    root: Optional[int] = None
    sites: Optional[Tuple[int, ...]] = None
    weights: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    control_energy: float = Field(1.0, ge=0)
    baseline_rate: float = Field(1.0, gt=0)
    e_reconf: Optional[float] = Field(None, ge=0)
    e_status: Optional[float] = Field(None, ge=0)
    reconfig_pause_ms: float = Field(528.0, ge=0)
    reconfig_period_s: float = Field(0.0, ge=0)
    reconfig_nodes: Tuple[int, ...] = ()
    status_period_s: float = Field(0.0, ge=0)
    duration_s: Optional[float] = Field(None, gt=0)
    jitter_ms: float = Field(0.0, ge=0)
    monitored_links: Optional[Tuple[Tuple[int, int], ...]] = None

    @field_validator('organization', mode='before')
    @classmethod
    def _parse_organization(cls, value):
        if not isinstance(value, str):
            return value
        try:
            return Organization.parse(value)
        except SmanetError as e:
            raise ValueError(e.message) from e

    @field_validator('sites', 'reconfig_nodes', 'weights', mode='before')
    @classmethod
    def _split_sequence(cls, value):
        return value if value is None else tuple(_tokens(value))

    @field_validator('team_budgets', mode='before')
    @classmethod
    def _parse_team_budgets(cls, value):
        if value is None or isinstance(value, dict):
            return value
        budgets = {}
        for token in _tokens(value):
            team, sep, count = token.partition(':')
            if not sep:
                raise ValueError(f"expected team:count, got '{token}'")
            budgets[team] = count
        return budgets

    @field_validator('monitored_links', mode='before')
    @classmethod
    def _parse_links(cls, value):
        if value is None:
            return value
        links = []
        for token in _tokens(value):
            if isinstance(token, str):
                a, sep, b = token.partition('-')
                if not sep:
                    raise ValueError(f"expected a-b, got '{token}'")
                token = (a, b)
            links.append(tuple(token))
        return tuple(links)

    @property
    def cost_weights(self) -> CostWeights:
        return CostWeights(*self.weights)

    @property
    def monitored(self) -> Optional[List[LinkKey]]:
        if self.monitored_links is None:
            return None
        return [link_key(a, b) for a, b in self.monitored_links]


@dataclass(frozen=True)
class Flow:
    src: int
    dst: int
    category: str
    rate_pps: float
    start_s: float
    end_s: float

    def __post_init__(self):
        if not self.rate_pps > 0:
            raise SmanetError(f"flow {self.src}->{self.dst}: rate must be > 0")
        if self.start_s < 0 or self.end_s < self.start_s:
            raise SmanetError(f"flow {self.src}->{self.dst}: needs 0 <= start <= end")
        if self.src == self.dst:
            raise SmanetError(f"flow {self.src}->{self.dst}: source and destination must differ")

    @property
    def spec(self) -> FlowSpec:
        return FlowSpec(self.src, self.dst, self.category)


TimelineEntry = Union[TopologyEvent, Reconfiguration]


@dataclass
class Scenario:
    topology: Topology
    policy: NtkPolicy = field(default_factory=NtkPolicy)
    flows: Tuple[Flow, ...] = ()
    timeline: Tuple[TimelineEntry, ...] = ()
    params: SimParams = field(default_factory=SimParams)
    name: str = field(default='', compare=False)
    placement: Optional[Placement] = field(default=None, compare=False)

    @property
    def deployment(self) -> frozenset:
        return self.topology.sdn_nodes

    @property
    def mode(self) -> ReactionMode:
        return self.params.mode

    @property
    def topology_events(self) -> List[TopologyEvent]:
        return [e for e in self.timeline if isinstance(e, TopologyEvent)]

    @property
    def reconfigurations(self) -> List[Reconfiguration]:
        return [e for e in self.timeline if isinstance(e, Reconfiguration)]

    @property
    def flow_specs(self) -> List[FlowSpec]:
        return list(dict.fromkeys(f.spec for f in self.flows))

    @property
    def failure_count(self) -> int:
        return sum(1 for e in self.topology_events if e.kind is EventKind.LINK_DOWN)

    @property
    def duration_s(self) -> float:
        if self.params.duration_s is not None:
            return self.params.duration_s
        ends = [f.end_s for f in self.flows] + [e.time_ms / 1000.0 for e in self.timeline]
        return max(ends) if ends and max(ends) > 0 else 1.0

    def with_params(self, **changes) -> 'Scenario':
        params = SimParams.model_validate({**self.params.model_dump(exclude_unset=True), **changes})
        return replace(self, params=params, placement=None)

    def validate(self) -> None:
        """Raise ScenarioInvalidError unless every reference resolves and times are ordered"""
        topo = self.topology
        try:
            self.policy.validate(topo.teams)
            for flow in self.flows:
                topo.node(flow.src)
                topo.node(flow.dst)
                self.policy.access_id(flow.category)
            last = -math.inf
            for entry in self.timeline:
                if entry.time_ms < last:
                    raise ScenarioInvalidError(f"event at {entry.time_ms} ms is out of order")
                last = entry.time_ms
                if isinstance(entry, TopologyEvent):
                    if entry.kind.is_link_event:
                        topo.link(entry.a, entry.b)
                    else:
                        topo.node(entry.a)
                else:
                    topo.node(entry.node)
            params = self.params
            for node_id in (params.sites or ()) + params.reconfig_nodes:
                topo.node(node_id)
            if params.root is not None:
                topo.node(params.root)
            for a, b in params.monitored_links or ():
                topo.link(a, b)
        except ScenarioInvalidError:
            raise
        except SmanetError as e:
            raise ScenarioInvalidError(e.message, e) from e
