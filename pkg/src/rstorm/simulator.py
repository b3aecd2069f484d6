"""Discrete-event simulation of scheduled topologies.

Every task is a single-threaded server with a FIFO input queue and a fixed
amount of CPU work per tuple. Tasks on the same node share the node's cores
under processor sharing, so a node whose busy tasks outnumber its cores
slows all of them down. Tuples crossing nodes pay the tier's propagation
delay; tuples leaving a node also pass through a rate-limited FIFO link
per tier and rack pair.

Spouts are flow-controlled by a per-task budget of pending tuple trees (a
tree completes once every descendant has been processed by a sink), and may
additionally be capped at a fixed emission rate.

Routing between a component and a downstream component's tasks is shuffle
grouping, drawn from a seeded RNG.
"""

from __future__ import annotations

import heapq
import itertools
import json
import random
import statistics
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .cluster import INTER_RACK, INTRA_NODE, INTRA_RACK, TIERS, Cluster
from .errors import MissingInput, SpecFormatError
from .scheduler import CommCost, Schedule, communication_cost
from .topology import ResourceVector, Topology, tasks_of

WINDOW = 10.0  # seconds per reported throughput window


@dataclass(frozen=True)
class WorkloadModel:
    """Timing parameters for a simulation run.

    A component's per-tuple CPU work is ``service_time[name]`` when given,
    else its declared cpu points times ``seconds_per_cpu_point``.
    ``spout_rate=None`` lets spouts emit as fast as their pending budget
    allows. ``link_capacity`` values of ``None`` mean unlimited.
    ``demand``, if set, is the per-task demand given to generated
    topologies run under this workload.
    """

    name: str = "custom"
    service_time: Mapping[str, float] = field(default_factory=dict)
    seconds_per_cpu_point: float = 0.0
    network_delay: Mapping[str, float] = field(
        default_factory=lambda: {INTRA_NODE: 0.0, INTRA_RACK: 0.0, INTER_RACK: 0.0}
    )
    link_capacity: Mapping[str, float | None] = field(
        default_factory=lambda: {INTRA_RACK: None, INTER_RACK: None}
    )
    spout_rate: float | None = None
    max_pending: int = 64
    demand: ResourceVector | None = None
    duration: float = 10.0

    def __post_init__(self):
        delays = {t: float(self.network_delay.get(t, 0.0)) for t in TIERS}
        object.__setattr__(self, "network_delay", delays)
        caps = {t: self.link_capacity.get(t) for t in (INTRA_RACK, INTER_RACK)}
        object.__setattr__(self, "link_capacity", caps)
        object.__setattr__(self, "service_time", dict(self.service_time))
        if any(v < 0 for v in delays.values()):
            raise ValueError("network delays must be non-negative")
        if not delays[INTRA_NODE] <= delays[INTRA_RACK] <= delays[INTER_RACK]:
            raise ValueError(f"network delays must be monotone over tiers: {delays}")
        if any(c is not None and c <= 0 for c in caps.values()):
            raise ValueError("link capacities must be positive or None")
        if any(v < 0 for v in self.service_time.values()) or self.seconds_per_cpu_point < 0:
            raise ValueError("service times must be non-negative")
        if self.spout_rate is not None and self.spout_rate <= 0:
            raise ValueError("spout_rate must be positive or None")
        if self.max_pending < 1:
            raise ValueError("max_pending must be at least 1")

    def service_of(self, topology: Topology, component: str) -> float:
        if component in self.service_time:
            return self.service_time[component]
        return topology.component(component).cpu * self.seconds_per_cpu_point

    def to_dict(self) -> dict:
        doc = {
            "name": self.name,
            "service_time": dict(self.service_time),
            "seconds_per_cpu_point": self.seconds_per_cpu_point,
            "network_delay": dict(self.network_delay),
            "link_capacity": dict(self.link_capacity),
            "spout_rate": self.spout_rate,
            "max_pending": self.max_pending,
            "duration": self.duration,
        }
        if self.demand is not None:
            doc["demand"] = {"cpu": self.demand.cpu, "mem": self.demand.mem, "bw": self.demand.bw}
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> WorkloadModel:
        try:
            demand = doc.get("demand")
            return cls(
                name=str(doc.get("name", "custom")),
                service_time={str(k): float(v) for k, v in doc.get("service_time", {}).items()},
                seconds_per_cpu_point=float(doc.get("seconds_per_cpu_point", 0.0)),
                network_delay={str(k): float(v) for k, v in doc.get("network_delay", {}).items()},
                link_capacity={
                    str(k): (None if v is None else float(v)) for k, v in doc.get("link_capacity", {}).items()
                },
                spout_rate=None if doc.get("spout_rate") is None else float(doc["spout_rate"]),
                max_pending=int(doc.get("max_pending", 64)),
                demand=None
                if demand is None
                else ResourceVector(mem=float(demand.get("mem", 0)), cpu=float(demand.get("cpu", 0)), bw=float(demand.get("bw", 0))),
                duration=float(doc.get("duration", 10.0)),
            )
        except (TypeError, ValueError, AttributeError) as exc:
            raise SpecFormatError(f"malformed workload spec: {exc}") from exc


def load_workload(path: str | Path) -> WorkloadModel:
    path = Path(path)
    if not path.is_file():
        raise MissingInput(f"workload fixture not found: {path}")
    with path.open() as fh:
        return WorkloadModel.from_dict(json.load(fh))


@dataclass
class SimReport:
    topology_id: str
    throughput: float  # sink tuples per 10 s window, averaged over sink components
    q_per_sink: dict[str, float]  # tuples/s per sink component
    cpu_utilization: dict[str, float]  # node -> busy fraction of its cores
    comm_breakdown: CommCost
    duration: float
    warmup: float
    seed: int
    used_nodes: list[str] = field(default_factory=list)
    edge_emitted: dict[str, int] = field(default_factory=dict)
    edge_received: dict[str, int] = field(default_factory=dict)

    @property
    def rate(self) -> float:
        """Mean sink throughput in tuples/s."""
        return self.throughput / WINDOW

    def to_dict(self) -> dict:
        return {
            "topology_id": self.topology_id,
            "throughput": self.throughput,
            "q_per_sink": dict(self.q_per_sink),
            "cpu_utilization": dict(self.cpu_utilization),
            "comm_breakdown": self.comm_breakdown.to_dict(),
            "duration": self.duration,
            "warmup": self.warmup,
            "seed": self.seed,
            "used_nodes": list(self.used_nodes),
            "edge_emitted": dict(self.edge_emitted),
            "edge_received": dict(self.edge_received),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> SimReport:
        return cls(
            topology_id=doc["topology_id"],
            throughput=float(doc["throughput"]),
            q_per_sink={k: float(v) for k, v in doc["q_per_sink"].items()},
            cpu_utilization={k: float(v) for k, v in doc["cpu_utilization"].items()},
            comm_breakdown=CommCost.from_dict(doc["comm_breakdown"]),
            duration=float(doc["duration"]),
            warmup=float(doc["warmup"]),
            seed=int(doc["seed"]),
            used_nodes=list(doc.get("used_nodes", [])),
            edge_emitted={k: int(v) for k, v in doc.get("edge_emitted", {}).items()},
            edge_received={k: int(v) for k, v in doc.get("edge_received", {}).items()},
        )


def utilization_summary(report: SimReport, used_nodes_only: bool = False) -> float:
    """Mean CPU utilization over all nodes, or only over nodes hosting a task."""
    if used_nodes_only:
        values = [report.cpu_utilization[n] for n in report.used_nodes]
    else:
        values = list(report.cpu_utilization.values())
    return statistics.fmean(values) if values else 0.0


# -- engine ------------------------------------------------------------------

_NODE_DONE, _ARRIVE, _SPOUT_WAKE, _MARK = range(4)


class _NodeRT:
    __slots__ = ("id", "rack", "cores", "busy", "last", "version", "work_done")

    def __init__(self, node_id, rack, cores):
        self.id = node_id
        self.rack = rack
        self.cores = cores
        self.busy: dict[_TaskRT, float] = {}
        self.last = 0.0
        self.version = 0
        self.work_done = 0.0

    def rate(self) -> float:
        n = len(self.busy)
        return min(1.0, self.cores / n) if n else 0.0

    def advance(self, now: float) -> None:
        dt = now - self.last
        if dt > 0 and self.busy:
            r = self.rate()
            step = dt * r
            for t in self.busy:
                self.busy[t] -= step
            self.work_done += step * len(self.busy)
        self.last = now


class _TaskRT:
    __slots__ = (
        "topo", "component", "index", "node", "work", "queue", "busy", "current",
        "out", "is_spout", "credits", "next_emit", "wake_pending", "topology_id",
    )

    def __init__(self, topo_idx, topology_id, component, index, node, work, is_spout, credits):
        self.topo = topo_idx
        self.topology_id = topology_id
        self.component = component
        self.index = index
        self.node = node
        self.work = work
        self.queue: deque[int] = deque()
        self.busy = False
        self.current = -1
        self.out: list[tuple[str, list[_TaskRT]]] = []
        self.is_spout = is_spout
        self.credits = credits
        self.next_emit = 0.0
        self.wake_pending = False


class _Engine:
    def __init__(self, placements, cluster: Cluster, model: WorkloadModel, duration: float, warmup: float, seed: int):
        self.cluster = cluster
        self.model = model
        self.duration = duration
        self.warmup = warmup
        self.rng = random.Random(seed)
        self.heap: list = []
        self.seq = itertools.count()
        self.now = 0.0
        self.stopped = False
        self.nodes = {n.id: _NodeRT(n.id, n.rack, n.cores) for n in cluster.nodes}
        self.link_free: dict[tuple[str, str, str], float] = {}
        self.outstanding: dict[int, int] = {}
        self.root_spout: dict[int, _TaskRT] = {}
        self.root_ids = itertools.count()
        self.spouts: list[_TaskRT] = []
        self.sink_counts: list[dict[str, int]] = []
        self.edge_emitted: list[dict[str, int]] = []
        self.edge_received: list[dict[str, int]] = []
        self.work_at_warmup: dict[str, float] = {}
        self.work_at_end: dict[str, float] = {}
        self.period = None if model.spout_rate is None else 1.0 / model.spout_rate

        for k, (sched, topo) in enumerate(placements):
            runtime: dict[str, list[_TaskRT]] = {}
            for task in tasks_of(topo):
                comp = topo.component(task.component)
                rt = _TaskRT(
                    k, topo.id, task.component, task.index,
                    self.nodes[sched.assignments[task]],
                    model.service_of(topo, task.component),
                    comp.is_spout, model.max_pending,
                )
                runtime.setdefault(task.component, []).append(rt)
                if comp.is_spout:
                    self.spouts.append(rt)
            for c in topo.components:
                for rt in runtime[c.name]:
                    rt.out = [(f"{c.name}->{d}", runtime[d]) for d in topo.successors[c.name]]
            self.sink_counts.append({s.name: 0 for s in topo.sinks})
            self.edge_emitted.append({f"{a}->{b}": 0 for a, b in topo.edges})
            self.edge_received.append({f"{a}->{b}": 0 for a, b in topo.edges})

    def push(self, when, kind, payload):
        heapq.heappush(self.heap, (when, next(self.seq), kind, payload))

    # node CPU ---------------------------------------------------------------

    def _reschedule(self, node: _NodeRT) -> None:
        node.version += 1
        if not node.busy:
            return
        task = min(node.busy, key=node.busy.__getitem__)
        rem = max(node.busy[task], 0.0)
        self.push(self.now + rem / node.rate(), _NODE_DONE, (node, node.version, task))

    def _start(self, task: _TaskRT, root: int) -> None:
        task.busy = True
        task.current = root
        node = task.node
        node.advance(self.now)
        node.busy[task] = task.work
        self._reschedule(node)

    def _node_done(self, node: _NodeRT, version: int, task: _TaskRT) -> None:
        if version != node.version:
            return
        node.advance(self.now)
        del node.busy[task]
        self._reschedule(node)
        self._complete(task)

    # tuple flow -------------------------------------------------------------

    def _spout_try(self, sp: _TaskRT) -> None:
        if sp.busy or self.stopped or sp.credits <= 0:
            return
        if self.period is not None:
            if self.now < sp.next_emit:
                if not sp.wake_pending:
                    sp.wake_pending = True
                    self.push(sp.next_emit, _SPOUT_WAKE, sp)
                return
            sp.next_emit = max(sp.next_emit, self.now) + self.period
        sp.credits -= 1
        root = next(self.root_ids)
        self.root_spout[root] = sp
        self.outstanding[root] = 1
        self._start(sp, root)

    def _complete(self, task: _TaskRT) -> None:
        root = task.current
        task.busy = False
        task.current = -1
        fanout = len(task.out)
        self.outstanding[root] += fanout - 1
        if fanout == 0 and self.warmup <= self.now <= self.duration:
            self.sink_counts[task.topo][task.component] += 1
        emitted = self.edge_emitted[task.topo]
        for edge, targets in task.out:
            dst = targets[0] if len(targets) == 1 else targets[self.rng.randrange(len(targets))]
            emitted[edge] += 1
            self._send(task, dst, root, edge)
        if self.outstanding[root] == 0:
            del self.outstanding[root]
            sp = self.root_spout.pop(root)
            sp.credits += 1
            if sp is not task:
                self._spout_try(sp)
        if task.is_spout:
            self._spout_try(task)
        elif task.queue:
            self._start(task, task.queue.popleft())

    def _send(self, src: _TaskRT, dst: _TaskRT, root: int, edge: str) -> None:
        a, b = src.node, dst.node
        if a is b:
            tier = INTRA_NODE
        elif a.rack == b.rack:
            tier = INTRA_RACK
        else:
            tier = INTER_RACK
        depart = self.now
        cap = self.model.link_capacity.get(tier)
        if cap is not None:
            key = (tier, a.rack, b.rack)
            depart = max(depart, self.link_free.get(key, 0.0)) + 1.0 / cap
            self.link_free[key] = depart
        self.push(depart + self.model.network_delay[tier], _ARRIVE, (dst, root, edge))

    def _arrive(self, dst: _TaskRT, root: int, edge: str) -> None:
        self.edge_received[dst.topo][edge] += 1
        if dst.busy:
            dst.queue.append(root)
        else:
            self._start(dst, root)

    def _snapshot(self, into: dict[str, float]) -> None:
        for node in self.nodes.values():
            node.advance(self.now)
            into[node.id] = node.work_done

    def run(self) -> None:
        self.push(self.warmup, _MARK, "warmup")
        self.push(self.duration, _MARK, "stop")
        for sp in self.spouts:
            self._spout_try(sp)
        heap = self.heap
        while heap:
            when, _, kind, payload = heapq.heappop(heap)
            self.now = when
            if kind == _NODE_DONE:
                self._node_done(*payload)
            elif kind == _ARRIVE:
                self._arrive(*payload)
            elif kind == _SPOUT_WAKE:
                payload.wake_pending = False
                self._spout_try(payload)
            elif payload == "warmup":
                self._snapshot(self.work_at_warmup)
            else:
                self._snapshot(self.work_at_end)
                # stop offering new tuples; in-flight trees drain to completion
                self.stopped = True


def simulate_many(
    placements: Sequence[tuple[Schedule, Topology]],
    cluster: Cluster,
    model: WorkloadModel,
    duration: float | None = None,
    seed: int = 0,
    warmup: float | None = None,
) -> list[SimReport]:
    """Simulate several scheduled topologies sharing one cluster.

    Returns one report per placement; CPU utilization is cluster-wide and
    identical across the reports.
    """
    duration = model.duration if duration is None else duration
    if duration <= 0:
        raise ValueError("duration must be positive")
    warmup = duration / 5 if warmup is None else warmup
    if not 0 <= warmup < duration:
        raise ValueError("warmup must lie in [0, duration)")
    for sched, topo in placements:
        if sched.unschedulable:
            raise ValueError(f"schedule for {topo.id!r} is partial: {len(sched.unschedulable)} unplaced tasks")
        missing = [t for t in tasks_of(topo) if t not in sched.assignments]
        if missing:
            raise ValueError(f"schedule for {topo.id!r} misses tasks {[str(t) for t in missing[:5]]}")
        if not topo.is_acyclic():
            raise ValueError(f"topology {topo.id!r} has a cycle; pass-through fan-out would never drain")

    engine = _Engine(placements, cluster, model, duration, warmup, seed)
    engine.run()

    window = duration - warmup
    util = {}
    for node in cluster.nodes:
        busy = engine.work_at_end[node.id] - engine.work_at_warmup[node.id]
        util[node.id] = min(1.0, max(0.0, busy / (node.cores * window)))

    reports = []
    for k, (sched, topo) in enumerate(placements):
        q = {name: count / window for name, count in engine.sink_counts[k].items()}
        reports.append(
            SimReport(
                topology_id=topo.id,
                throughput=statistics.fmean(q.values()) * WINDOW if q else 0.0,
                q_per_sink=q,
                cpu_utilization=dict(util),
                comm_breakdown=communication_cost(sched, topo, cluster),
                duration=duration,
                warmup=warmup,
                seed=seed,
                used_nodes=sched.nodes_used,
                edge_emitted=engine.edge_emitted[k],
                edge_received=engine.edge_received[k],
            )
        )
    return reports


def simulate(
    schedule: Schedule,
    topology: Topology,
    cluster: Cluster,
    model: WorkloadModel,
    duration: float | None = None,
    seed: int = 0,
    warmup: float | None = None,
) -> SimReport:
    """Simulate one scheduled topology; warmup defaults to a fifth of the run."""
    return simulate_many([(schedule, topology)], cluster, model, duration, seed, warmup)[0]
