"""Resource-aware task placement and the round-robin baseline.

The resource-aware scheduler orders tasks by sweeping a breadth-first
ordering of components, then places each task on the memory-feasible node
whose residual (mem, cpu) is closest to the task's demand, with a penalty
for network distance from the topology's reference node.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cluster import INTER_RACK, INTRA_NODE, INTRA_RACK, Cluster, ClusterState, network_distance, node_with_most_resources, rack_with_most_resources
from .errors import HardConstraintViolation, Unschedulable
from .topology import Task, Topology, require_valid, tasks_of


@dataclass(frozen=True)
class SchedulerConfig:
    weight_mem: float = 1.0
    weight_cpu: float = 1.0
    weight_bw: float = 1.0

    def __post_init__(self):
        ws = (self.weight_mem, self.weight_cpu, self.weight_bw)
        if any(w < 0 for w in ws) or not any(w > 0 for w in ws):
            raise ValueError(f"weights must be non-negative with at least one positive: {ws}")

    def scaled(self, k: float) -> SchedulerConfig:
        return SchedulerConfig(self.weight_mem * k, self.weight_cpu * k, self.weight_bw * k)


@dataclass
class Schedule:
    topology_id: str
    assignments: dict[Task, str] = field(default_factory=dict)
    ref_node: str | None = None
    unschedulable: list[Task] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.unschedulable

    @property
    def nodes_used(self) -> list[str]:
        seen: dict[str, None] = {}
        for node in self.assignments.values():
            seen.setdefault(node, None)
        return list(seen)

    def tasks_on(self, node_id: str) -> list[Task]:
        return [t for t, n in self.assignments.items() if n == node_id]

    def node_of(self, task: Task) -> str:
        return self.assignments[task]

    def to_dict(self) -> dict:
        return {
            "topology_id": self.topology_id,
            "ref_node": self.ref_node,
            "assignments": [[t.key, n] for t, n in self.assignments.items()],
            "unschedulable": [t.key for t in self.unschedulable],
        }


# -- task selection ----------------------------------------------------------


def bfs_traversal(topology: Topology) -> list[str]:
    """Component names in breadth-first order from the spouts.

    A virtual root linked to every spout (declaration order) seeds the
    queue; neighbours are expanded in edge-declaration order.
    """
    require_valid(topology)
    visited: dict[str, None] = {}
    queue: deque[str] = deque()
    for spout in topology.spouts:
        visited[spout.name] = None
        queue.append(spout.name)
    while queue:
        com = queue.popleft()
        for n in topology.successors[com]:
            if n not in visited:
                visited[n] = None
                queue.append(n)
    return list(visited)


def task_selection(topology: Topology) -> list[Task]:
    """Round-robin over the BFS component order, one task per component per sweep."""
    order = bfs_traversal(topology)
    pending = {name: deque() for name in order}
    for task in tasks_of(topology):
        pending[task.component].append(task)
    ordering: list[Task] = []
    while any(pending.values()):
        for name in order:
            if pending[name]:
                ordering.append(pending[name].popleft())
    return ordering


# -- node selection ----------------------------------------------------------


def _squared_distance(task: Task, node_id: str, ref: str, state: ClusterState, cfg: SchedulerConfig) -> float:
    avail = state[node_id]
    dm = task.demand.mem - avail.mem
    dc = task.demand.cpu - avail.cpu
    return cfg.weight_mem * dm * dm + cfg.weight_cpu * dc * dc + cfg.weight_bw * network_distance(state.cluster, ref, node_id)


def distance(task: Task, node_id: str, ref: str, state: ClusterState, cfg: SchedulerConfig = SchedulerConfig()) -> float:
    """Weighted Euclidean distance between task demand and node availability.

    Memory and CPU enter as squared differences against the node's residual
    availability; the bandwidth term is the (unsquared) network distance
    from the reference node.
    """
    return math.sqrt(_squared_distance(task, node_id, ref, state, cfg))


def _tie_key(cluster: Cluster, node_id: str, ref: str) -> tuple[bool, int, int]:
    node = cluster.node(node_id)
    return (node_id != ref, cluster.rack_index[node.rack], cluster.node_index[node_id])


def node_selection(
    task: Task,
    state: ClusterState,
    ref: str | None = None,
    cfg: SchedulerConfig = SchedulerConfig(),
) -> tuple[str, str]:
    """Pick a node for ``task``; returns ``(node, ref)``.

    With no reference node yet, the most-resourced node of the
    most-resourced rack becomes the reference and takes the task directly
    if it has the memory. Otherwise the minimum-distance feasible node
    wins, ties going to the reference node, then rack order, then node
    order.
    """
    cluster = state.cluster
    if ref is None:
        ref = node_with_most_resources(state, rack_with_most_resources(state))
        if state.fits(task, ref):
            return ref, ref
    best = None
    best_key = None
    for node in cluster.nodes:
        if not state.fits(task, node.id):
            continue
        key = (_squared_distance(task, node.id, ref, state, cfg),) + _tie_key(cluster, node.id, ref)
        if best_key is None or key < best_key:
            best, best_key = node.id, key
    if best is None:
        raise Unschedulable(task)
    return best, ref


def schedule(
    topology: Topology,
    state: ClusterState,
    cfg: SchedulerConfig = SchedulerConfig(),
) -> tuple[Schedule, ClusterState]:
    """Place every task of ``topology``; returns the schedule and the post-commit state.

    ``state`` is left untouched. Tasks with no memory-feasible node are
    listed in ``unschedulable`` and the rest are still placed.
    """
    work = state.copy()
    result = Schedule(topology.id)
    ref: str | None = None
    for task in task_selection(topology):
        try:
            node, ref = node_selection(task, work, ref, cfg)
        except Unschedulable:
            result.unschedulable.append(task)
            continue
        work.commit_inplace(task, node)
        result.assignments[task] = node
    result.ref_node = ref
    return result, work


def round_robin_schedule(topology: Topology, state: ClusterState) -> tuple[Schedule, ClusterState]:
    """Baseline: cycle through nodes in declaration order, ignoring CPU.

    A node without enough residual memory is passed over for that task.
    """
    work = state.copy()
    nodes = [n.id for n in state.cluster.nodes]
    result = Schedule(topology.id)
    cursor = 0
    for task in tasks_of(topology):
        for step in range(len(nodes)):
            node = nodes[(cursor + step) % len(nodes)]
            if work.fits(task, node):
                work.commit_inplace(task, node)
                result.assignments[task] = node
                if result.ref_node is None:
                    result.ref_node = node
                cursor = (cursor + step + 1) % len(nodes)
                break
        else:
            result.unschedulable.append(task)
    return result, work


# -- metrics -----------------------------------------------------------------


@dataclass(frozen=True)
class CommCost:
    """Task-pair counts per placement tier over all topology edges, plus the distance-weighted sum."""

    intra_node: int = 0
    intra_rack: int = 0
    inter_rack: int = 0
    weighted_sum: float = 0.0

    def to_dict(self) -> dict:
        return {
            "intra_node": self.intra_node,
            "intra_rack": self.intra_rack,
            "inter_rack": self.inter_rack,
            "weighted_sum": self.weighted_sum,
        }

    @classmethod
    def from_dict(cls, doc) -> CommCost:
        return cls(int(doc["intra_node"]), int(doc["intra_rack"]), int(doc["inter_rack"]), float(doc["weighted_sum"]))


def communication_cost(sched: Schedule, topology: Topology, state: ClusterState | Cluster) -> CommCost:
    cluster = state.cluster if isinstance(state, ClusterState) else state
    by_component: dict[str, list[str]] = {c.name: [] for c in topology.components}
    for task in tasks_of(topology):
        if task not in sched.assignments:
            raise ValueError(f"schedule does not place task {task}")
        by_component[task.component].append(sched.assignments[task])
    counts = {INTRA_NODE: 0, INTRA_RACK: 0, INTER_RACK: 0}
    weighted = 0.0
    for a, b in topology.edges:
        for na in by_component[a]:
            for nb in by_component[b]:
                tier = cluster.tier(na, nb)
                counts[tier] += 1
                weighted += cluster.tier_distance(tier)
    return CommCost(counts[INTRA_NODE], counts[INTRA_RACK], counts[INTER_RACK], weighted)


def memory_overcommit(schedules: Iterable[Schedule], cluster: Cluster, initial: ClusterState | None = None) -> dict[str, float]:
    """Nodes whose assigned memory exceeds what was free, with the excess in MB.

    Recomputed from the assignments alone, independent of the scheduler's
    own bookkeeping. Empty means the hard constraint held.
    """
    free = {n.id: (initial[n.id].mem if initial is not None else n.mem_capacity) for n in cluster.nodes}
    for s in schedules:
        for task, node in s.assignments.items():
            free[node] -= task.demand.mem
    return {n: -v for n, v in free.items() if v < 0}


def schedule_many(
    topologies: Sequence[Topology],
    state: ClusterState,
    scheduler: str = "rstorm",
    cfg: SchedulerConfig = SchedulerConfig(),
) -> tuple[list[Schedule], ClusterState]:
    """Schedule topologies one after another against a chained cluster state.

    Each topology gets its own reference node.
    """
    out = []
    for topo in topologies:
        if scheduler == "rstorm":
            sched, state = schedule(topo, state, cfg)
        elif scheduler == "round_robin":
            sched, state = round_robin_schedule(topo, state)
        else:
            raise ValueError(f"unknown scheduler {scheduler!r}")
        out.append(sched)
    return out, state


__all__ = [
    "CommCost",
    "HardConstraintViolation",
    "Schedule",
    "SchedulerConfig",
    "Unschedulable",
    "bfs_traversal",
    "communication_cost",
    "distance",
    "memory_overcommit",
    "node_selection",
    "round_robin_schedule",
    "schedule",
    "schedule_many",
    "task_selection",
]
