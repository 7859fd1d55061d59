"""
Deterministic discrete-event simulation of packet flows over a hybrid SDN
MANET under one of three failure-reaction modes:

- centralized: the controller learns of a failure, recomputes and pushes
  tables after a round trip plus a recompute delay
- manet-backup: SDN nodes fall back to the MANET routing protocol and wait
  for it to converge
- delegated: precomputed stateful rules fail over as soon as the node's
  link-state machine detects the failure
"""

import asyncio
import bisect
import heapq
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

from config.config import config
from dataplane.stateful import StatefulInstall, install_stateful_tables, transition
from deployment.selectability import secure_path
from netmodel.events import EventKind, TopologyEvent, apply_event
from netmodel.routing import default_max_hops, legacy_next_hop, try_legacy_path
from netmodel.topology import LinkKey, Topology
from placement.placement_cost import (
    Organization, Placement, assign_forwarders, choose_root, controller_path_latency, forwarders_of
)
from placement.placement_manager import solve_placement
from policy.policy_compiler import compile_policy
from policy.rule_table import LEGACY, ActionKind, Header, RuleTable, match_rule
from sim.energy import energy_model
from sim.metrics import Metrics, SimTrace
from sim.scenario import ReactionMode, Scenario
from utils.errors import SmanetError, UnreachableError

logger = logging.getLogger(__name__)


def ms_to_us(ms: float) -> int:
    return int(round(ms * 1000))


class SimKind(str, Enum):
    PACKET_INJECT = 'packet-inject'
    PACKET_HOP = 'packet-hop'
    LINK_DOWN = 'link-down'
    LINK_UP = 'link-up'
    NODE_COMPROMISED = 'node-compromised'
    NODE_RESTORED = 'node-restored'
    DETECT = 'detect'
    CONTROLLER_RTT_COMPLETE = 'controller-rtt-complete'
    TABLE_PUSH = 'table-push'
    RECONVERGENCE_COMPLETE = 'reconvergence-complete'
    RECOMPILE = 'recompile'
    RECONFIGURE = 'reconfigure'
    STATUS_UPDATE = 'status-update'


_TOPOLOGY_KINDS = {
    EventKind.LINK_DOWN: SimKind.LINK_DOWN,
    EventKind.LINK_UP: SimKind.LINK_UP,
    EventKind.NODE_COMPROMISED: SimKind.NODE_COMPROMISED,
    EventKind.NODE_RESTORED: SimKind.NODE_RESTORED,
}


@dataclass
class Packet:
    pid: int
    header: Header
    injected_us: int
    hops: int = 0
    tainted: bool = False


class Simulation:
    """One run: a single-threaded event loop owning all mutable state"""

    def __init__(self, scenario: Scenario, seed: Optional[int] = None, mode: Optional[ReactionMode] = None):
        scenario.validate()
        self.scenario = scenario
        self.params = scenario.params
        self.mode = ReactionMode(mode) if mode is not None else self.params.mode
        self.seed = self.params.seed if seed is None else seed
        self.rng = random.Random(self.seed)
        self.upgrades = frozenset(scenario.deployment)
        self.duration_s = scenario.duration_s

        base = scenario.topology
        self.actual: Topology = base
        self.routing_view: Topology = base
        self.controller_view: Topology = base

        self.metrics = Metrics(mode=self.mode.value, seed=self.seed)
        self.trace = SimTrace()
        self._queue: List[Tuple[int, int, SimKind, dict]] = []
        self._seq = 0
        self.now = 0

        self._packets: Dict[int, Packet] = {}
        self._live = set()
        self._next_pid = 0
        self._open_failures: Dict[int, int] = {}
        self._next_failure = 0
        self._reconf_count: Counter = Counter()
        self._status_count: Counter = Counter()
        self._checkpoint_us = max(1, ms_to_us(config.trace_checkpoint_ms))
        self._next_checkpoint = self._checkpoint_us

        self.placement: Optional[Placement] = None
        if self.mode is ReactionMode.CENTRALIZED:
            self.placement = scenario.placement or self._resolve_placement()

        self.stateful: Optional[StatefulInstall] = None
        self.machines = {}
        if self.mode is ReactionMode.DELEGATED:
            self.stateful = install_stateful_tables(base, self.upgrades, self.params.monitored,
                                                    self.params.detection_delay_ms)
            self.machines = {node: dict(m) for node, m in self.stateful.machines.items()}

        self.tables: Dict[int, RuleTable] = {}
        self._recompile(base)
        self._pauses = self._pause_windows()

    # Setup

    def _resolve_placement(self) -> Optional[Placement]:
        topo, params = self.scenario.topology, self.params
        capacity = params.capacity or max(1, len(forwarders_of(topo)))
        if params.sites:
            sites = tuple(sorted(params.sites))
            assignment = assign_forwarders(topo, sites, capacity)
            root = None
            if params.organization is Organization.HIERARCHICAL:
                root = params.root if params.root is not None else choose_root(topo, sites)
            return Placement(sites, params.organization, assignment.mapping, capacity, root,
                             tuple(assignment.unassigned))
        if not topo.candidates:
            logger.warning("[SIM] No controller candidates; centralized reaction degrades to MANET convergence")
            return None
        try:
            return solve_placement(topo, None, params.max_sites, capacity, params.cost_weights,
                                   params.organization, self.seed, params.root, params.control_energy)
        except SmanetError as e:
            logger.warning(f"[SIM] Controller placement failed ({e.message}); using MANET convergence")
            return None

    def _reconfiguration_schedule(self) -> List[Tuple[int, int]]:
        """(time_us, node) of every scenario reconfiguration, explicit then periodic"""
        schedule = [(ms_to_us(r.time_ms), r.node) for r in self.scenario.reconfigurations]
        period = self.params.reconfig_period_s
        if period > 0:
            k = 1
            while k * period < self.duration_s:
                for node in self.params.reconfig_nodes:
                    schedule.append((ms_to_us(k * period * 1000), node))
                k += 1
        return schedule

    def _pause_windows(self) -> Dict[int, Tuple[List[int], List[int]]]:
        pause = ms_to_us(self.params.reconfig_pause_ms)
        raw: Dict[int, List[Tuple[int, int]]] = {}
        if pause <= 0:
            return {}
        for time_us, node in self._reconfiguration_schedule():
            raw.setdefault(node, []).append((time_us, time_us + pause))
        windows = {}
        for node, spans in raw.items():
            merged: List[List[int]] = []
            for start, end in sorted(spans):
                if merged and start <= merged[-1][1]:
                    merged[-1][1] = max(merged[-1][1], end)
                else:
                    merged.append([start, end])
            windows[node] = ([s for s, _ in merged], [e for _, e in merged])
        return windows

    def _pause_end(self, node: int, time_us: int) -> Optional[int]:
        spans = self._pauses.get(node)
        if not spans:
            return None
        starts, ends = spans
        i = bisect.bisect_right(starts, time_us) - 1
        if i >= 0 and time_us < ends[i]:
            return ends[i]
        return None

    def _schedule_initial(self) -> None:
        for ev in self.scenario.topology_events:
            self._push(ms_to_us(ev.time_ms), _TOPOLOGY_KINDS[ev.kind], event=ev)
        for time_us, node in self._reconfiguration_schedule():
            self._push(time_us, SimKind.RECONFIGURE, node=node)
        period = self.params.status_period_s
        if period > 0:
            k = 1
            while k * period < self.duration_s:
                for node in sorted(self.upgrades):
                    self._push(ms_to_us(k * period * 1000), SimKind.STATUS_UPDATE, node=node)
                k += 1
        for index, flow in enumerate(self.scenario.flows):
            offset = ms_to_us(self.rng.uniform(0, self.params.jitter_ms)) if self.params.jitter_ms > 0 else 0
            count = math.ceil(round((flow.end_s - flow.start_s) * flow.rate_pps, 9))
            if count > 0:
                self._push(ms_to_us(flow.start_s * 1000) + offset, SimKind.PACKET_INJECT,
                           flow=index, k=0, count=count, offset=offset)

    # Event loop

    def _push(self, time_us: int, kind: SimKind, **payload) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (time_us, self._seq, kind, payload))

    def run(self) -> Tuple[SimTrace, Metrics]:
        self._schedule_initial()
        handlers = {
            SimKind.PACKET_INJECT: self._on_inject,
            SimKind.PACKET_HOP: self._on_hop,
            SimKind.LINK_DOWN: self._on_topology,
            SimKind.LINK_UP: self._on_topology,
            SimKind.NODE_COMPROMISED: self._on_topology,
            SimKind.NODE_RESTORED: self._on_topology,
            SimKind.DETECT: self._on_detect,
            SimKind.CONTROLLER_RTT_COMPLETE: self._on_controller_rtt,
            SimKind.TABLE_PUSH: self._on_table_push,
            SimKind.RECONVERGENCE_COMPLETE: self._on_reconvergence,
            SimKind.RECOMPILE: self._on_recompile,
            SimKind.RECONFIGURE: self._on_reconfigure,
            SimKind.STATUS_UPDATE: self._on_status,
        }
        while self._queue:
            time_us, seq, kind, payload = heapq.heappop(self._queue)
            while self._next_checkpoint < time_us:
                self._checkpoint(self._next_checkpoint)
                self._next_checkpoint += self._checkpoint_us
            self.now = time_us
            handlers[kind](time_us, seq, **payload)
        self._checkpoint(self.now)
        self._finish()
        return self.trace, self.metrics

    def _checkpoint(self, time_us: int) -> None:
        m = self.metrics
        live = len(self._live)
        counters = m.counters()
        ok = m.conserved() and m.in_flight == live
        self.trace.checkpoints.append({"time_us": time_us, **counters, "live": live, "conserved": ok})
        self.trace.record(time_us, 0, 'checkpoint', **counters, live=live)
        if not ok:
            logger.error(f"[SIM] Packet conservation broken at {time_us} us: {counters}, live={live}")

    def _finish(self) -> None:
        params = self.params
        for node in self.scenario.topology.nodes:
            self.metrics.energy[node.id] = energy_model(
                self._reconf_count[node.id], self._status_count[node.id], self.duration_s,
                params.baseline_rate, params.e_reconf, params.e_status)
        m = self.metrics
        logger.info(f"[SIM] {self.mode.value} seed={self.seed}: injected {m.injected}, delivered {m.delivered}, "
                    f"policy drops {m.dropped_policy}, losses {m.dropped_loss}, "
                    f"recovery {m.recovery_latency} ms, controller messages {m.controller_messages}")

    # Control plane

    def _controller_message(self, count: int = 1) -> None:
        self.metrics.controller_messages += count
        if self._open_failures:
            self.metrics.failover_controller_messages += count

    def _close_failure(self, failure: Optional[int], time_us: int, seq: int) -> None:
        if failure is None or failure not in self._open_failures:
            return
        start = self._open_failures.pop(failure)
        recovery_ms = (time_us - start) / 1000.0
        self.metrics.recovery_latency.append(recovery_ms)
        self.trace.record(time_us, seq, 'recovered', failure=failure, latency_us=time_us - start)

    def _controller_rtt(self, link: LinkKey) -> Optional[Tuple[float, int]]:
        """(latency, endpoint) of the SDN endpoint closest to its controller after the change"""
        if self.placement is None:
            return None
        options = []
        for end in link:
            if end not in self.upgrades:
                continue
            latency = controller_path_latency(self.actual, self.placement, end)
            if latency is not None:
                options.append((latency, end))
        return min(options) if options else None

    def _recompile(self, view: Topology) -> None:
        scenario = self.scenario
        specs = scenario.flow_specs
        overrides = {}
        compromised = self.actual.compromised
        if compromised:
            hops = self.params.max_hops or default_max_hops(view)
            for spec in specs:
                route = try_legacy_path(view, spec.src, spec.dst)
                if not route or not (set(route[1:-1]) & compromised):
                    continue
                alt = secure_path(view, self.upgrades, spec.src, spec.dst, compromised, hops)
                if alt is None:
                    logger.warning(f"[SIM] No selectable route for {spec.src}->{spec.dst} avoids "
                                   f"compromised nodes {sorted(compromised)}")
                else:
                    overrides[(spec.src, spec.dst)] = alt
        pinned = self.stateful.rules if self.stateful is not None else None
        self.tables, _ = compile_policy(scenario.policy, view, self.upgrades, specs, overrides, pinned)

    def _push_tables(self, time_us: int, seq: int) -> None:
        for node in sorted(self.upgrades):
            self._reconf_count[node] += 1
        self._controller_message(len(self.upgrades))
        self.trace.record(time_us, seq, SimKind.TABLE_PUSH.value, nodes=len(self.upgrades))

    def _on_topology(self, time_us: int, seq: int, event: TopologyEvent) -> None:
        kind = _TOPOLOGY_KINDS[event.kind]
        if not event.kind.is_link_event:
            self.actual = apply_event(self.actual, event)
            self.trace.record(time_us, seq, kind.value, node=event.a)
            self._controller_message(1)
            self._push(time_us + ms_to_us(self.params.recompute_ms), SimKind.RECOMPILE)
            return

        link = event.link
        was_up = self.actual.link_up(*link)
        self.actual = apply_event(self.actual, event)
        up = event.kind is EventKind.LINK_UP
        self.trace.record(time_us, seq, kind.value, link=f"{link[0]}-{link[1]}")

        failure = None
        if not up and was_up:
            failure = self._next_failure
            self._next_failure += 1
            self._open_failures[failure] = time_us

        closes_on_convergence = failure
        if self.mode is ReactionMode.DELEGATED:
            monitors = [n for n in link if link in self.machines.get(n, {})]
            for node in monitors:
                self._push(time_us + ms_to_us(self.params.detection_delay_ms), SimKind.DETECT,
                           node=node, event=event, failure=failure)
            if monitors:
                closes_on_convergence = None
        elif self.mode is ReactionMode.CENTRALIZED:
            rtt = self._controller_rtt(link)
            if rtt is not None:
                latency, endpoint = rtt
                self._controller_message(1)
                self._push(time_us + ms_to_us(2 * latency), SimKind.CONTROLLER_RTT_COMPLETE,
                           link=link, up=up, failure=failure, endpoint=endpoint)
                closes_on_convergence = None
        self._push(time_us + ms_to_us(self.params.convergence_ms), SimKind.RECONVERGENCE_COMPLETE,
                   link=link, up=up, failure=closes_on_convergence)

    def _on_detect(self, time_us: int, seq: int, node: int, event: TopologyEvent, failure: Optional[int]) -> None:
        machine = self.machines[node][event.link]
        self.machines[node][event.link] = transition(machine, event)
        self.trace.record(time_us, seq, SimKind.DETECT.value, node=node,
                          link=f"{event.link[0]}-{event.link[1]}",
                          state=self.machines[node][event.link].state.value)
        self._close_failure(failure, time_us, seq)

    def _on_controller_rtt(self, time_us: int, seq: int, link: LinkKey, up: bool,
                           failure: Optional[int], endpoint: int) -> None:
        self.trace.record(time_us, seq, SimKind.CONTROLLER_RTT_COMPLETE.value, endpoint=endpoint)
        self._push(time_us + ms_to_us(self.params.recompute_ms), SimKind.TABLE_PUSH,
                   link=link, up=up, failure=failure)

    def _on_table_push(self, time_us: int, seq: int, link: LinkKey, up: bool, failure: Optional[int]) -> None:
        self.controller_view = self.controller_view.with_link_state(link[0], link[1], up)
        self._recompile(self.controller_view)
        self._push_tables(time_us, seq)
        self._close_failure(failure, time_us, seq)

    def _on_reconvergence(self, time_us: int, seq: int, link: LinkKey, up: bool, failure: Optional[int]) -> None:
        self.routing_view = self.routing_view.with_link_state(link[0], link[1], up)
        self.trace.record(time_us, seq, SimKind.RECONVERGENCE_COMPLETE.value,
                          link=f"{link[0]}-{link[1]}", up=int(up))
        self._close_failure(failure, time_us, seq)

    def _on_recompile(self, time_us: int, seq: int) -> None:
        view = self.controller_view if self.mode is ReactionMode.CENTRALIZED else self.routing_view
        self._recompile(view)
        self._push_tables(time_us, seq)

    def _on_reconfigure(self, time_us: int, seq: int, node: int) -> None:
        self.metrics.reconfigurations += 1
        self._reconf_count[node] += 1
        self._controller_message(1)
        self.trace.record(time_us, seq, SimKind.RECONFIGURE.value, node=node)

    def _on_status(self, time_us: int, seq: int, node: int) -> None:
        self.metrics.status_updates += 1
        self._status_count[node] += 1
        self.trace.record(time_us, seq, SimKind.STATUS_UPDATE.value, node=node)

    # Data plane

    def _on_inject(self, time_us: int, seq: int, flow: int, k: int, count: int, offset: int) -> None:
        spec = self.scenario.flows[flow]
        access = self.scenario.policy.access_id(spec.category)
        packet = Packet(self._next_pid, Header(spec.src, spec.dst, access), time_us)
        self._next_pid += 1
        self._packets[packet.pid] = packet
        self._live.add(packet.pid)
        self.metrics.injected += 1
        self.metrics.in_flight += 1
        self.trace.record(time_us, seq, SimKind.PACKET_INJECT.value, pkt=packet.pid, flow=flow)
        if k + 1 < count:
            start = ms_to_us(spec.start_s * 1000) + offset
            self._push(start + int(round((k + 1) * 1_000_000 / spec.rate_pps)), SimKind.PACKET_INJECT,
                       flow=flow, k=k + 1, count=count, offset=offset)
        self._forward(packet, spec.src, time_us, seq)

    def _on_hop(self, time_us: int, seq: int, pid: int, node: int) -> None:
        self._forward(self._packets[pid], node, time_us, seq)

    def _forward(self, packet: Packet, node: int, time_us: int, seq: int) -> None:
        header = packet.header
        if node == header.dst:
            self._deliver(packet, time_us, seq)
            return
        if node != header.src and node in self.actual.compromised:
            packet.tainted = True
        resume = self._pause_end(node, time_us)
        if resume is not None:
            self.trace.record(time_us, seq, 'paused', pkt=packet.pid, at=node, until=resume)
            self._push(resume, SimKind.PACKET_HOP, pid=packet.pid, node=node)
            return
        if packet.hops >= self.params.ttl:
            logger.warning(f"[SIM] TTL expired for packet {packet.pid} ({header.src}->{header.dst}) at node {node}; "
                           f"forwarding loop suspected")
            self.metrics.loop_drops += 1
            self._lose(packet, time_us, seq, node, 'ttl')
            return

        if node in self.upgrades:
            view = self.controller_view if self.mode is ReactionMode.CENTRALIZED else self.routing_view
            states = {key: m.state for key, m in self.machines.get(node, {}).items()}
            action = match_rule(self.tables.get(node), header, states)
        else:
            view = self.routing_view
            action = LEGACY
        if action.kind is ActionKind.DROP:
            self.metrics.dropped_policy += 1
            self.trace.record(time_us, seq, 'drop-policy', pkt=packet.pid, at=node)
            self._retire(packet)
            return
        if action.kind is ActionKind.FORWARD and view.link_up(node, action.next_hop):
            next_hop = action.next_hop
        else:
            try:
                next_hop = legacy_next_hop(view, node, header.dst)
            except UnreachableError:
                self._lose(packet, time_us, seq, node, 'no-route')
                return
        if not self.actual.link_up(node, next_hop):
            self._lose(packet, time_us, seq, node, 'link-down')
            return
        packet.hops += 1
        arrival = time_us + ms_to_us(self.actual.link(node, next_hop).latency)
        self.trace.record(time_us, seq, SimKind.PACKET_HOP.value, pkt=packet.pid, at=node, to=next_hop)
        self._push(arrival, SimKind.PACKET_HOP, pid=packet.pid, node=next_hop)

    def _deliver(self, packet: Packet, time_us: int, seq: int) -> None:
        header = packet.header
        m = self.metrics
        m.delivered += 1
        m.total_delay_ms += (time_us - packet.injected_us) / 1000.0
        team = self.actual.team_of(header.dst)
        if not self.scenario.policy.is_cleared(team, header.access_id):
            m.ntk_violations += 1
        if packet.tainted:
            m.compromised_transits += 1
        self.trace.record(time_us, seq, 'deliver', pkt=packet.pid, at=header.dst,
                          delay_us=time_us - packet.injected_us)
        self._retire(packet)

    def _lose(self, packet: Packet, time_us: int, seq: int, node: int, reason: str) -> None:
        self.metrics.dropped_loss += 1
        self.trace.record(time_us, seq, 'drop-loss', pkt=packet.pid, at=node, reason=reason)
        self._retire(packet)

    def _retire(self, packet: Packet) -> None:
        self.metrics.in_flight -= 1
        self._live.discard(packet.pid)
        del self._packets[packet.pid]


def run(scenario: Scenario, seed: Optional[int] = None,
        mode: Optional[ReactionMode] = None) -> Tuple[SimTrace, Metrics]:
    """Simulate one scenario; identical (scenario, seed, mode) gives an identical trace"""
    return Simulation(scenario, seed, mode).run()


def _metrics_only(scenario: Scenario, seed: Optional[int], mode: Optional[ReactionMode]) -> Metrics:
    return run(scenario, seed, mode)[1]


async def _gather_runs(jobs: List[Tuple[Scenario, Optional[int], Optional[ReactionMode]]]) -> List[Metrics]:
    return await asyncio.gather(*(asyncio.to_thread(_metrics_only, *job) for job in jobs))


def _run_all(jobs: List[Tuple[Scenario, Optional[int], Optional[ReactionMode]]]) -> List[Metrics]:
    if config.parallel_runs and len(jobs) > 1:
        return asyncio.run(_gather_runs(jobs))
    return [_metrics_only(*job) for job in jobs]


def compare_modes(scenario: Scenario, seed: Optional[int] = None) -> Dict[str, Metrics]:
    """Run every reaction mode on the same scenario and seed"""
    if scenario.failure_count == 0:
        logger.warning("[SIM] Scenario has no link failure; the modes will not differ in reaction")
    modes = list(ReactionMode)
    results = _run_all([(scenario, seed, mode) for mode in modes])
    return {mode.value: metrics for mode, metrics in zip(modes, results)}


def seed_sweep(scenario: Scenario, seeds: Iterable[int], mode: Optional[ReactionMode] = None) -> Dict[int, Metrics]:
    seeds = list(seeds)
    results = _run_all([(scenario, seed, mode) for seed in seeds])
    return dict(zip(seeds, results))
