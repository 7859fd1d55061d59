"""
Line-oriented scenario files.

    [nodes]    id kind sdn(0/1) candidate(0/1) battery|inf [bank]
    [links]    a b latency_ms
    [teams]    team member...
    [policy]   category name access_id
               clear team access_id...
    [flows]    src dst category rate_pps start_s end_s
    [events]   time_ms link_down|link_up a b
               time_ms node_compromised|node_restored n
               time_ms reconfigure n
    [params]   key value...

'#' starts a comment. Every failure is reported as a ScenarioParseError (or
its ScenarioSemanticError subclass for dangling references) carrying the
offending line number.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import ValidationError

from config.config import SCENARIO_DIR
from netmodel.events import EventKind, Reconfiguration, TopologyEvent
from netmodel.topology import LinkRecord, NodeKind, NodeRecord, Topology, link_key
from policy.ntk_policy import Category, NtkPolicy
from sim.scenario import Flow, Scenario, SimParams
from utils.errors import (
    ScenarioInvalidError, ScenarioParseError, ScenarioSemanticError, SmanetError
)

logger = logging.getLogger(__name__)

SECTIONS = ('nodes', 'links', 'teams', 'policy', 'flows', 'events', 'params')
SCENARIO_SUFFIX = '.scn'


@dataclass
class _Row:
    line: int
    fields: List[str]


def _split_sections(text: str) -> Dict[str, List[_Row]]:
    sections: Dict[str, List[_Row]] = {}
    current = None
    for number, raw in enumerate(text.splitlines(), 1):
        content = raw.split('#', 1)[0].strip()
        if not content:
            continue
        if content.startswith('['):
            if not content.endswith(']'):
                raise ScenarioParseError(number, f"malformed section header '{content}'")
            name = content[1:-1].strip().lower()
            if name not in SECTIONS:
                raise ScenarioParseError(number, f"unknown section [{name}]")
            if name in sections:
                raise ScenarioParseError(number, f"duplicate section [{name}]")
            sections[name] = []
            current = name
            continue
        if current is None:
            raise ScenarioParseError(number, "content before the first section header")
        sections[current].append(_Row(number, content.split()))
    if 'nodes' not in sections:
        raise ScenarioParseError(0, "missing [nodes] section")
    return sections


# Field readers

def _arity(row: _Row, low: int, high: Optional[int], usage: str) -> None:
    count = len(row.fields)
    if count < low or (high is not None and count > high):
        raise ScenarioParseError(row.line, f"expected '{usage}', got {count} fields")


def _int(row: _Row, index: int, name: str) -> int:
    token = row.fields[index]
    try:
        return int(token)
    except ValueError:
        raise ScenarioParseError(row.line, f"{name} must be an integer, got '{token}'")


def _number(row: _Row, index: int, name: str, allow_inf: bool = False) -> float:
    token = row.fields[index]
    try:
        value = float(token)
    except ValueError:
        raise ScenarioParseError(row.line, f"{name} must be a number, got '{token}'")
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise ScenarioParseError(row.line, f"{name} must be finite, got '{token}'")
    return value


def _flag(row: _Row, index: int, name: str) -> bool:
    token = row.fields[index]
    if token not in ('0', '1'):
        raise ScenarioParseError(row.line, f"{name} must be 0 or 1, got '{token}'")
    return token == '1'


def _known(row: _Row, node_id: int, nodes) -> int:
    if node_id not in nodes:
        raise ScenarioSemanticError(row.line, f"unknown node {node_id}")
    return node_id


# Sections

def _parse_nodes(rows: List[_Row]) -> Dict[int, Tuple[_Row, dict]]:
    nodes: Dict[int, Tuple[_Row, dict]] = {}
    for row in rows:
        _arity(row, 5, 6, "id kind sdn candidate battery [bank]")
        node_id = _int(row, 0, 'node id')
        if node_id in nodes:
            raise ScenarioParseError(row.line, f"duplicate node {node_id}")
        try:
            kind = NodeKind(row.fields[1])
        except ValueError:
            raise ScenarioParseError(row.line, f"unknown node kind '{row.fields[1]}'")
        bank = False
        if len(row.fields) == 6:
            if row.fields[5] != 'bank':
                raise ScenarioParseError(row.line, f"unexpected field '{row.fields[5]}' (only 'bank' allowed)")
            bank = True
        nodes[node_id] = (row, dict(id=node_id, kind=kind, sdn_capable=_flag(row, 2, 'sdn'),
                                    controller_candidate=_flag(row, 3, 'candidate'),
                                    battery=_number(row, 4, 'battery', allow_inf=True), power_bank=bank))
    return nodes


def _parse_links(rows: List[_Row], nodes) -> List[LinkRecord]:
    links: Dict[Tuple[int, int], LinkRecord] = {}
    for row in rows:
        _arity(row, 3, 3, "a b latency_ms")
        a = _known(row, _int(row, 0, 'link endpoint'), nodes)
        b = _known(row, _int(row, 1, 'link endpoint'), nodes)
        latency = _number(row, 2, 'latency')
        key = link_key(a, b)
        if key in links:
            raise ScenarioParseError(row.line, f"duplicate link {key[0]}-{key[1]}")
        try:
            links[key] = LinkRecord(a, b, latency)
        except SmanetError as e:
            raise ScenarioParseError(row.line, e.message, e)
    return list(links.values())


def _parse_teams(rows: List[_Row], nodes) -> Dict[int, str]:
    membership: Dict[int, str] = {}
    teams = set()
    for row in rows:
        _arity(row, 2, None, "team member...")
        team = row.fields[0]
        if team in teams:
            raise ScenarioParseError(row.line, f"duplicate team {team}")
        teams.add(team)
        for index in range(1, len(row.fields)):
            node_id = _known(row, _int(row, index, 'team member'), nodes)
            if node_id in membership:
                raise ScenarioParseError(row.line, f"node {node_id} is already in team {membership[node_id]}")
            membership[node_id] = team
    return membership


def _parse_policy(rows: List[_Row], teams) -> NtkPolicy:
    categories: List[Category] = []
    clearances: Dict[str, set] = {}
    clear_rows: List[_Row] = []
    for row in rows:
        directive = row.fields[0]
        if directive == 'category':
            _arity(row, 3, 3, "category name access_id")
            name, access = row.fields[1], _int(row, 2, 'access id')
            if any(c.name == name for c in categories):
                raise ScenarioParseError(row.line, f"duplicate category {name}")
            if any(c.access_id == access for c in categories):
                raise ScenarioParseError(row.line, f"access id {access} is already used")
            categories.append(Category(name, access))
        elif directive == 'clear':
            _arity(row, 2, None, "clear team access_id...")
            clear_rows.append(row)
        else:
            raise ScenarioParseError(row.line, f"unknown policy directive '{directive}'")
    known = {c.access_id for c in categories}
    for row in clear_rows:
        team = row.fields[1]
        if team not in teams:
            raise ScenarioSemanticError(row.line, f"unknown team {team}")
        granted = clearances.setdefault(team, set())
        for index in range(2, len(row.fields)):
            access = _int(row, index, 'access id')
            if access not in known:
                raise ScenarioSemanticError(row.line, f"unknown access id {access}")
            granted.add(access)
    return NtkPolicy(tuple(categories), {team: frozenset(ids) for team, ids in clearances.items()})


def _parse_flows(rows: List[_Row], nodes, policy: NtkPolicy) -> List[Flow]:
    flows = []
    known = {c.name for c in policy.categories}
    for row in rows:
        _arity(row, 6, 6, "src dst category rate_pps start_s end_s")
        src = _known(row, _int(row, 0, 'flow source'), nodes)
        dst = _known(row, _int(row, 1, 'flow destination'), nodes)
        category = row.fields[2]
        if category not in known:
            raise ScenarioSemanticError(row.line, f"unknown category {category}")
        try:
            flows.append(Flow(src, dst, category, _number(row, 3, 'rate'),
                              _number(row, 4, 'start'), _number(row, 5, 'end')))
        except SmanetError as e:
            raise ScenarioParseError(row.line, e.message, e)
    return flows


def _parse_events(rows: List[_Row], nodes, links) -> List[Union[TopologyEvent, Reconfiguration]]:
    timeline = []
    last = 0.0
    for row in rows:
        _arity(row, 3, 4, "time_ms kind node [node]")
        time_ms = _number(row, 0, 'event time')
        if time_ms < 0:
            raise ScenarioParseError(row.line, f"event time must be >= 0, got {row.fields[0]}")
        if time_ms < last:
            raise ScenarioParseError(row.line, f"event at {row.fields[0]} ms is earlier than the previous one")
        last = time_ms
        kind = row.fields[1]
        if kind == 'reconfigure':
            _arity(row, 3, 3, "time_ms reconfigure n")
            timeline.append(Reconfiguration(time_ms, _known(row, _int(row, 2, 'node'), nodes)))
            continue
        try:
            event_kind = EventKind(kind)
        except ValueError:
            raise ScenarioParseError(row.line, f"unknown event kind '{kind}'")
        if event_kind.is_link_event:
            _arity(row, 4, 4, f"time_ms {kind} a b")
            a = _known(row, _int(row, 2, 'link endpoint'), nodes)
            b = _known(row, _int(row, 3, 'link endpoint'), nodes)
            if link_key(a, b) not in links:
                raise ScenarioSemanticError(row.line, f"unknown link {a}-{b}")
            timeline.append(TopologyEvent(time_ms, event_kind, a, b))
        else:
            _arity(row, 3, 3, f"time_ms {kind} n")
            timeline.append(TopologyEvent(time_ms, event_kind, _known(row, _int(row, 2, 'node'), nodes)))
    return timeline


def _parse_params(rows: List[_Row], nodes, links) -> SimParams:
    raw: Dict[str, str] = {}
    lines: Dict[str, int] = {}
    for row in rows:
        _arity(row, 2, None, "key value...")
        key = row.fields[0]
        if key not in SimParams.model_fields:
            raise ScenarioParseError(row.line, f"unknown parameter '{key}'")
        if key in raw:
            raise ScenarioParseError(row.line, f"duplicate parameter '{key}'")
        raw[key] = " ".join(row.fields[1:])
        lines[key] = row.line
    try:
        params = SimParams.model_validate(raw)
    except ValidationError as e:
        error = e.errors()[0]
        key = str(error['loc'][0]) if error['loc'] else ''
        raise ScenarioParseError(lines.get(key, 0), f"{key}: {error['msg']}", e)

    for key in ('sites', 'reconfig_nodes'):
        for node_id in getattr(params, key) or ():
            if node_id not in nodes:
                raise ScenarioSemanticError(lines[key], f"{key}: unknown node {node_id}")
    if params.root is not None and params.root not in nodes:
        raise ScenarioSemanticError(lines['root'], f"root: unknown node {params.root}")
    for a, b in params.monitored_links or ():
        if link_key(a, b) not in links:
            raise ScenarioSemanticError(lines['monitored_links'], f"monitored_links: unknown link {a}-{b}")
    return params


def parse_scenario(text: str, name: str = '') -> Scenario:
    """Parse and validate scenario text; never raises anything but ScenarioParseError"""
    try:
        sections = _split_sections(text)
        node_rows = _parse_nodes(sections['nodes'])
        links = _parse_links(sections.get('links', []), node_rows)
        membership = _parse_teams(sections.get('teams', []), node_rows)
        policy = _parse_policy(sections.get('policy', []), set(membership.values()))
        flows = _parse_flows(sections.get('flows', []), node_rows, policy)
        link_keys = {l.key for l in links}
        timeline = _parse_events(sections.get('events', []), node_rows, link_keys)
        params = _parse_params(sections.get('params', []), node_rows, link_keys)

        records = []
        for node_id, (row, fields) in node_rows.items():
            try:
                records.append(NodeRecord(team=membership.get(node_id), **fields))
            except SmanetError as e:
                raise ScenarioParseError(row.line, e.message, e)
        scenario = Scenario(Topology(tuple(records), tuple(links)), policy, tuple(flows), tuple(timeline),
                            params, name=name)
        scenario.validate()
    except ScenarioParseError:
        raise
    except ScenarioInvalidError as e:
        raise ScenarioSemanticError(0, e.message, e)
    except SmanetError as e:
        raise ScenarioParseError(0, e.message, e)
    except Exception as e:
        raise ScenarioParseError(0, f"unexpected error: {e}", e)
    logger.debug(f"[SCENARIO] Parsed '{name}': {len(records)} nodes, {len(links)} links, "
                 f"{len(flows)} flows, {len(timeline)} events")
    return scenario


# Rendering

def _num(value) -> str:
    if isinstance(value, bool):
        return '1' if value else '0'
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf'
        if value.is_integer():
            return str(int(value))
        return repr(value)
    return str(value)


def _param_text(value) -> str:
    if isinstance(value, dict):
        return " ".join(f"{k}:{_num(v)}" for k, v in value.items())
    if isinstance(value, (list, tuple)):
        parts = []
        for item in value:
            if isinstance(item, (list, tuple)):
                parts.append("-".join(_num(x) for x in item))
            else:
                parts.append(_num(item))
        return " ".join(parts)
    return _num(value)


def render_scenario(scenario: Scenario) -> str:
    """Inverse of parse_scenario for everything a scenario file can express"""
    topo = scenario.topology
    lines = []
    if scenario.name:
        lines.append(f"# {scenario.name}")

    lines.append("[nodes]")
    for n in topo.nodes:
        row = f"{n.id} {n.kind.value} {_num(n.sdn_capable)} {_num(n.controller_candidate)} {_num(n.battery)}"
        lines.append(row + (" bank" if n.power_bank else ""))

    lines.append("[links]")
    lines.extend(f"{l.a} {l.b} {_num(l.latency)}" for l in topo.links)

    teams = topo.teams
    if teams:
        lines.append("[teams]")
        lines.extend(f"{team} {' '.join(str(m) for m in members)}" for team, members in sorted(teams.items()))

    policy = scenario.policy
    if policy.categories or policy.clearances:
        lines.append("[policy]")
        lines.extend(f"category {c.name} {c.access_id}" for c in policy.categories)
        for team, ids in sorted(policy.clearances.items()):
            lines.append(" ".join(["clear", team] + [str(i) for i in sorted(ids)]))

    if scenario.flows:
        lines.append("[flows]")
        lines.extend(f"{f.src} {f.dst} {f.category} {_num(f.rate_pps)} {_num(f.start_s)} {_num(f.end_s)}"
                     for f in scenario.flows)

    if scenario.timeline:
        lines.append("[events]")
        for entry in scenario.timeline:
            if isinstance(entry, Reconfiguration):
                lines.append(f"{_num(entry.time_ms)} reconfigure {entry.node}")
            elif entry.kind.is_link_event:
                lines.append(f"{_num(entry.time_ms)} {entry.kind.value} {entry.a} {entry.b}")
            else:
                lines.append(f"{_num(entry.time_ms)} {entry.kind.value} {entry.a}")

    values = scenario.params.model_dump(mode='json', exclude_unset=True, exclude_none=True)
    if values:
        lines.append("[params]")
        lines.extend(f"{key} {_param_text(value)}" for key, value in values.items())
    return "\n".join(lines) + "\n"


def resolve_scenario_path(path: Union[str, Path]) -> Path:
    """The path itself, else the same name (with or without suffix) under the bundled scenario directory"""
    path = Path(path)
    candidates = [path]
    if not path.is_absolute():
        candidates.append(SCENARIO_DIR / path)
        if path.suffix != SCENARIO_SUFFIX:
            candidates.append(SCENARIO_DIR / path.with_suffix(SCENARIO_SUFFIX))
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    raise SmanetError(f"scenario file not found: {path}")


def load_scenario(path: Union[str, Path]) -> Scenario:
    resolved = resolve_scenario_path(path)
    try:
        text = resolved.read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as e:
        raise SmanetError(f"cannot read scenario {resolved}: {e}", e)
    try:
        scenario = parse_scenario(text, name=resolved.stem)
    except ScenarioParseError as e:
        e.message = f"{resolved.name}: {e.message}"
        e.args = (e.message,)
        raise
    logger.info(f"[SCENARIO] Loaded {resolved.name}: {len(scenario.topology.nodes)} nodes, "
                f"{len(scenario.topology.links)} links, {len(scenario.flows)} flows")
    return scenario


def bundled_scenarios() -> List[Path]:
    return sorted(SCENARIO_DIR.glob(f"*{SCENARIO_SUFFIX}"))
