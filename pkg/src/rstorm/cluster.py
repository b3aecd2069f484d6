"""Physical cluster model: racks, nodes, the distance ladder and residual state."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, Mapping

from .errors import ClusterError, HardConstraintViolation, MissingInput, SpecFormatError
from .topology import ResourceVector, Task

CPU_POINTS_PER_CORE = 100.0

INTRA_NODE = "intra_node"
INTRA_RACK = "intra_rack"
INTER_RACK = "inter_rack"
TIERS = (INTRA_NODE, INTRA_RACK, INTER_RACK)


@dataclass(frozen=True)
class Node:
    id: str
    rack: str
    cpu_capacity: float
    mem_capacity: float

    @classmethod
    def with_cores(cls, id: str, rack: str, cores: float, mem_capacity: float) -> Node:
        return cls(id, rack, CPU_POINTS_PER_CORE * cores, mem_capacity)

    @property
    def cores(self) -> float:
        return self.cpu_capacity / CPU_POINTS_PER_CORE

    @property
    def capacity(self) -> ResourceVector:
        return ResourceVector(mem=self.mem_capacity, cpu=self.cpu_capacity)


@dataclass(frozen=True)
class Rack:
    id: str
    nodes: tuple[Node, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))


@dataclass(frozen=True)
class Cluster:
    racks: tuple[Rack, ...]
    intra_node_distance: float = 0.0
    intra_rack_distance: float = 1.0
    inter_rack_distance: float = 4.0

    def __post_init__(self):
        object.__setattr__(self, "racks", tuple(self.racks))
        if not self.racks:
            raise ClusterError("cluster has no racks")
        seen: set[str] = set()
        for rack in self.racks:
            if not rack.nodes:
                raise ClusterError(f"rack {rack.id!r} is empty")
            for node in rack.nodes:
                if node.id in seen:
                    raise ClusterError(f"duplicate node id {node.id!r}")
                seen.add(node.id)
                if node.rack != rack.id:
                    raise ClusterError(f"node {node.id!r} claims rack {node.rack!r} but sits in {rack.id!r}")
                if node.cpu_capacity <= 0 or node.mem_capacity <= 0:
                    raise ClusterError(f"node {node.id!r} needs positive cpu and mem capacity")
        if len({r.id for r in self.racks}) != len(self.racks):
            raise ClusterError("duplicate rack id")
        d0, d1, d2 = self.intra_node_distance, self.intra_rack_distance, self.inter_rack_distance
        if not 0 <= d0 <= d1 <= d2:
            raise ClusterError(f"distance ladder must satisfy 0 <= {d0} <= {d1} <= {d2}")

    @classmethod
    def uniform(
        cls,
        racks: int,
        nodes_per_rack: int,
        cpu: float = 100.0,
        mem: float = 2048.0,
        **distances,
    ) -> Cluster:
        """``racks`` x ``nodes_per_rack`` identical nodes named r<i>n<j>."""
        built = []
        for i in range(1, racks + 1):
            rid = f"r{i}"
            built.append(Rack(rid, tuple(Node(f"{rid}n{j}", rid, cpu, mem) for j in range(1, nodes_per_rack + 1))))
        return cls(tuple(built), **distances)

    @cached_property
    def nodes(self) -> tuple[Node, ...]:
        """All nodes, rack declaration order then node declaration order."""
        return tuple(n for r in self.racks for n in r.nodes)

    @cached_property
    def node_index(self) -> dict[str, int]:
        return {n.id: i for i, n in enumerate(self.nodes)}

    @cached_property
    def rack_index(self) -> dict[str, int]:
        return {r.id: i for i, r in enumerate(self.racks)}

    @cached_property
    def _node_by_id(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    def node(self, node_id: str) -> Node:
        try:
            return self._node_by_id[node_id]
        except KeyError:
            raise ClusterError(f"unknown node {node_id!r}") from None

    def rack(self, rack_id: str) -> Rack:
        try:
            return self.racks[self.rack_index[rack_id]]
        except KeyError:
            raise ClusterError(f"unknown rack {rack_id!r}") from None

    @cached_property
    def total_capacity(self) -> ResourceVector:
        return ResourceVector(
            mem=sum(n.mem_capacity for n in self.nodes),
            cpu=sum(n.cpu_capacity for n in self.nodes),
        )

    def tier(self, a: str, b: str) -> str:
        """Placement tier of a node pair: intra_node, intra_rack or inter_rack."""
        na, nb = self.node(a), self.node(b)
        if na.id == nb.id:
            return INTRA_NODE
        if na.rack == nb.rack:
            return INTRA_RACK
        return INTER_RACK

    def tier_distance(self, tier: str) -> float:
        return {
            INTRA_NODE: self.intra_node_distance,
            INTRA_RACK: self.intra_rack_distance,
            INTER_RACK: self.inter_rack_distance,
        }[tier]


def network_distance(cluster: Cluster | ClusterState, a: str, b: str) -> float:
    """Distance-ladder value between two nodes (symmetric, d(a, a) minimal)."""
    if isinstance(cluster, ClusterState):
        cluster = cluster.cluster
    return cluster.tier_distance(cluster.tier(a, b))


@dataclass
class ClusterState:
    """Residual availability per node during scheduling.

    Memory is hard: residual memory never drops below zero. CPU is soft and
    may go negative, which records over-subscription.
    """

    cluster: Cluster
    avail: dict[str, ResourceVector] = field(default_factory=dict)

    def __post_init__(self):
        if not self.avail:
            self.avail = {n.id: n.capacity for n in self.cluster.nodes}
        missing = set(self.cluster.node_index) - set(self.avail)
        if missing:
            raise ClusterError(f"state lacks availability for nodes {sorted(missing)}")

    @classmethod
    def fresh(cls, cluster: Cluster) -> ClusterState:
        return cls(cluster)

    def copy(self) -> ClusterState:
        return ClusterState(self.cluster, dict(self.avail))

    def __getitem__(self, node_id: str) -> ResourceVector:
        try:
            return self.avail[node_id]
        except KeyError:
            raise ClusterError(f"unknown node {node_id!r}") from None

    def __iter__(self) -> Iterator[str]:
        return iter(self.avail)

    def fits(self, task: Task, node_id: str) -> bool:
        return self[node_id].mem >= task.demand.mem

    def commit(self, task: Task, node_id: str) -> ClusterState:
        """New state with ``task`` charged to ``node_id``."""
        new = self.copy()
        new.commit_inplace(task, node_id)
        return new

    def commit_inplace(self, task: Task, node_id: str) -> None:
        have = self[node_id]
        if have.mem < task.demand.mem:
            raise HardConstraintViolation(task, node_id, have.mem, task.demand.mem)
        # bandwidth is positional (distance from the ref node), not a depletable stock
        self.avail[node_id] = ResourceVector(have.mem - task.demand.mem, have.cpu - task.demand.cpu, have.bw)

    def used(self, node_id: str) -> ResourceVector:
        cap = self.cluster.node(node_id).capacity
        left = self[node_id]
        return ResourceVector(cap.mem - left.mem, cap.cpu - left.cpu)

    def node_score(self, node_id: str) -> float:
        """Residual mem and cpu, each normalised by the cluster-wide capacity, summed."""
        total = self.cluster.total_capacity
        a = self[node_id]
        return a.mem / total.mem + a.cpu / total.cpu


def commit(state: ClusterState, task: Task, node_id: str) -> ClusterState:
    return state.commit(task, node_id)


def rack_with_most_resources(state: ClusterState) -> str:
    """Rack with the largest normalised residual mem + cpu; first rack wins ties."""
    best_id, best_score = None, None
    for rack in state.cluster.racks:
        score = sum(state.node_score(n.id) for n in rack.nodes)
        if best_score is None or score > best_score:
            best_id, best_score = rack.id, score
    if best_id is None:
        raise ClusterError("cluster is empty")
    return best_id


def node_with_most_resources(state: ClusterState, rack_id: str) -> str:
    """Node of ``rack_id`` with the largest normalised residual; first node wins ties."""
    rack = state.cluster.rack(rack_id)
    best_id, best_score = None, None
    for node in rack.nodes:
        score = state.node_score(node.id)
        if best_score is None or score > best_score:
            best_id, best_score = node.id, score
    return best_id


# -- spec files --------------------------------------------------------------


def cluster_from_dict(doc: Mapping) -> Cluster:
    try:
        racks = []
        for r in doc["racks"]:
            rid = str(r["id"])
            nodes = []
            for n in r["nodes"]:
                if "cpu" in n:
                    cpu = float(n["cpu"])
                else:
                    cpu = CPU_POINTS_PER_CORE * float(n.get("cores", 1))
                nodes.append(Node(str(n["id"]), rid, cpu, float(n["mem"])))
            racks.append(Rack(rid, tuple(nodes)))
        dist = doc.get("distances", {}) or {}
        return Cluster(
            tuple(racks),
            intra_node_distance=float(dist.get(INTRA_NODE, 0.0)),
            intra_rack_distance=float(dist.get(INTRA_RACK, 1.0)),
            inter_rack_distance=float(dist.get(INTER_RACK, 4.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecFormatError(f"malformed cluster spec: {exc}") from exc


def cluster_to_dict(cluster: Cluster) -> dict:
    return {
        "racks": [
            {
                "id": r.id,
                "nodes": [{"id": n.id, "cpu": n.cpu_capacity, "mem": n.mem_capacity} for n in r.nodes],
            }
            for r in cluster.racks
        ],
        "distances": {
            INTRA_NODE: cluster.intra_node_distance,
            INTRA_RACK: cluster.intra_rack_distance,
            INTER_RACK: cluster.inter_rack_distance,
        },
    }


def load_cluster(path: str | Path) -> Cluster:
    path = Path(path)
    if not path.is_file():
        raise MissingInput(f"cluster spec not found: {path}")
    with path.open() as fh:
        return cluster_from_dict(json.load(fh))
