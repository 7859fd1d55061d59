"""
CSV renderings of command results. Column order is fixed per result type,
floats use six decimals and a header row is always written.
"""

import csv
import io
from functools import singledispatch
from typing import Iterable, List, Mapping, Sequence, Tuple

from deployment.deployment_manager import DeploymentPlan
from placement.placement_cost import Placement
from policy.rule_table import RuleTable
from sim.metrics import Metrics
from utils.errors import SmanetError

PLAN_COLUMNS = ['method', 'upgrades', 'objective', 'pairs', 'pairs_with_path']
PLACEMENT_COLUMNS = ['organization', 'sites', 'root', 'capacity', 'assigned', 'unassigned',
                     'control_latency', 'sync_cost', 'energy_penalty', 'total']
TABLE_COLUMNS = ['node', 'priority', 'src', 'dst', 'access_id', 'state', 'action', 'next_hop']
METRICS_COLUMNS = ['run', 'mode', 'seed', 'injected', 'delivered', 'dropped_policy', 'dropped_loss',
                   'in_flight', 'mean_delivery_delay_ms', 'failures_recovered', 'mean_recovery_latency_ms',
                   'max_recovery_latency_ms', 'ntk_violations', 'compromised_transits', 'loop_drops',
                   'controller_messages', 'failover_controller_messages', 'reconfigurations',
                   'status_updates', 'total_energy']


def _cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return '1' if value else '0'
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, (list, tuple, frozenset, set)):
        return " ".join(str(v) for v in sorted(value))
    return str(value)


def _write(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


@singledispatch
def emit_csv(result) -> str:
    """CSV text for a deployment plan, placement, rule tables or simulation metrics"""
    raise SmanetError(f"no CSV layout for {type(result).__name__}")


@emit_csv.register
def _(plan: DeploymentPlan) -> str:
    with_path = sum(1 for n in plan.per_pair.values() if n > 0)
    return _write(PLAN_COLUMNS, [[plan.method, plan.upgrades, plan.objective, len(plan.per_pair), with_path]])


@emit_csv.register
def _(placement: Placement) -> str:
    cost = placement.cost
    costs = [cost.control_latency, cost.sync_cost, cost.energy_penalty, cost.total] if cost else [None] * 4
    row = [placement.organization.value, placement.sites, placement.root, placement.capacity,
           len(placement.assignment), placement.unassigned] + costs
    return _write(PLACEMENT_COLUMNS, [row])


def _table_rows(table: RuleTable) -> List[list]:
    rows = []
    for rule in table.rules:
        m = rule.match
        state = str(m.state) if m.state is not None else ''
        rows.append([table.node_id, rule.priority,
                     '*' if m.src is None else m.src,
                     '*' if m.dst is None else m.dst,
                     '*' if m.access_id is None else m.access_id,
                     state, rule.action.kind.value, rule.action.next_hop])
    return rows


@emit_csv.register
def _(table: RuleTable) -> str:
    return _write(TABLE_COLUMNS, _table_rows(table))


def _metrics_row(run, m: Metrics) -> list:
    recovery = m.recovery_latency
    return [run, m.mode, m.seed, m.injected, m.delivered, m.dropped_policy, m.dropped_loss, m.in_flight,
            float(m.mean_delivery_delay), len(recovery),
            float(sum(recovery) / len(recovery)) if recovery else None,
            float(max(recovery)) if recovery else None,
            m.ntk_violations, m.compromised_transits, m.loop_drops, m.controller_messages,
            m.failover_controller_messages, m.reconfigurations, m.status_updates, float(m.total_energy)]


def _metrics_csv(runs: Iterable[Tuple[object, Metrics]]) -> str:
    return _write(METRICS_COLUMNS, [_metrics_row(run, m) for run, m in runs])


@emit_csv.register
def _(metrics: Metrics) -> str:
    return _metrics_csv([(metrics.mode, metrics)])


@emit_csv.register(list)
def _(results: list) -> str:
    return _metrics_csv((m.mode, m) for m in results)


@emit_csv.register(dict)
def _(results: Mapping) -> str:
    values = list(results.values())
    if values and all(isinstance(v, RuleTable) for v in values):
        rows = []
        for node_id in sorted(results):
            rows.extend(_table_rows(results[node_id]))
        return _write(TABLE_COLUMNS, rows)
    return _metrics_csv(results.items())
