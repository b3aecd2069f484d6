"""Stream topologies: components, tasks, resource demands and validation.

A topology is a directed graph of components. Spouts emit tuples, bolts
consume them. Each component is instantiated as ``parallelism`` tasks and
every task inherits its component's per-task resource demand.

Declaration order of components and edges is kept as given; downstream
code relies on it for deterministic tie-breaking.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import MissingInput, SpecFormatError, TopologyError


@dataclass(frozen=True)
class ResourceVector:
    """Memory (hard), CPU points and bandwidth (both soft).

    Used for task demands as well as node availability. Memory is the only
    hard-constrained dimension.
    """

    mem: float = 0.0
    cpu: float = 0.0
    bw: float = 0.0

    HARD = ("mem",)
    SOFT = ("cpu", "bw")

    def __add__(self, other: ResourceVector) -> ResourceVector:
        return ResourceVector(self.mem + other.mem, self.cpu + other.cpu, self.bw + other.bw)

    def __sub__(self, other: ResourceVector) -> ResourceVector:
        return ResourceVector(self.mem - other.mem, self.cpu - other.cpu, self.bw - other.bw)

    def scaled(self, k: float) -> ResourceVector:
        return ResourceVector(self.mem * k, self.cpu * k, self.bw * k)


class Kind(str, enum.Enum):
    SPOUT = "spout"
    BOLT = "bolt"


@dataclass(frozen=True)
class Component:
    name: str
    kind: Kind
    parallelism: int = 1
    cpu: float = 0.0
    mem: float = 0.0
    bw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))

    @property
    def demand(self) -> ResourceVector:
        return ResourceVector(mem=self.mem, cpu=self.cpu, bw=self.bw)

    @property
    def is_spout(self) -> bool:
        return self.kind is Kind.SPOUT


@dataclass(frozen=True, order=True)
class Task:
    """One runnable instance of a component; the unit of placement."""

    component: str
    index: int
    demand: ResourceVector = field(default=ResourceVector(), compare=False)

    def __str__(self) -> str:
        return f"{self.component}[{self.index}]"

    def __hash__(self) -> int:
        return hash((self.component, self.index))

    @property
    def key(self) -> str:
        return str(self)


@dataclass(frozen=True)
class Violation:
    """One breach of a topology invariant."""

    kind: str
    subject: str
    message: str = ""

    def __str__(self) -> str:
        return f"{self.kind}({self.subject}): {self.message}" if self.message else f"{self.kind}({self.subject})"


# Violation kinds
EMPTY_NAME = "EmptyComponentName"
DUPLICATE_COMPONENT = "DuplicateComponent"
INVALID_PARALLELISM = "InvalidParallelism"
NEGATIVE_DEMAND = "NegativeDemand"
UNKNOWN_ENDPOINT = "UnknownEdgeEndpoint"
SELF_LOOP = "SelfLoop"
NO_SPOUT = "NoSpout"
SPOUT_IN_DEGREE = "SpoutHasInDegree"
UNREACHABLE = "UnreachableComponent"


@dataclass(frozen=True)
class Topology:
    id: str
    components: tuple[Component, ...]
    edges: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "edges", tuple((str(a), str(b)) for a, b in self.edges))

    @cached_property
    def by_name(self) -> dict[str, Component]:
        return {c.name: c for c in self.components}

    @cached_property
    def successors(self) -> dict[str, list[str]]:
        """Outgoing neighbours per component, in edge-declaration order."""
        out: dict[str, list[str]] = {c.name: [] for c in self.components}
        for a, b in self.edges:
            out.setdefault(a, []).append(b)
        return out

    @cached_property
    def predecessors(self) -> dict[str, list[str]]:
        inc: dict[str, list[str]] = {c.name: [] for c in self.components}
        for a, b in self.edges:
            inc.setdefault(b, []).append(a)
        return inc

    @property
    def spouts(self) -> list[Component]:
        return [c for c in self.components if c.is_spout]

    @property
    def sinks(self) -> list[Component]:
        """Components with no outgoing edges (output bolts)."""
        return [c for c in self.components if not self.successors.get(c.name)]

    def component(self, name: str) -> Component:
        try:
            return self.by_name[name]
        except KeyError:
            raise KeyError(f"unknown component {name!r} in topology {self.id!r}") from None

    def is_acyclic(self) -> bool:
        indeg = {c.name: 0 for c in self.components}
        for _, b in self.edges:
            indeg[b] += 1
        ready = deque(n for n, d in indeg.items() if d == 0)
        seen = 0
        while ready:
            n = ready.popleft()
            seen += 1
            for m in self.successors[n]:
                indeg[m] -= 1
                if indeg[m] == 0:
                    ready.append(m)
        return seen == len(indeg)

    @property
    def total_demand(self) -> ResourceVector:
        total = ResourceVector()
        for c in self.components:
            total = total + c.demand.scaled(c.parallelism)
        return total


def validate(topology: Topology) -> list[Violation]:
    """Return every invariant breach in ``topology``; empty means valid."""
    violations: list[Violation] = []
    seen: set[str] = set()
    for c in topology.components:
        if not c.name:
            violations.append(Violation(EMPTY_NAME, repr(c.name), "component name must be non-empty"))
        if c.name in seen:
            violations.append(Violation(DUPLICATE_COMPONENT, c.name))
        seen.add(c.name)
        if not isinstance(c.parallelism, int) or c.parallelism < 1:
            violations.append(Violation(INVALID_PARALLELISM, c.name, f"parallelism={c.parallelism!r}"))
        for dim in ("cpu", "mem", "bw"):
            if getattr(c, dim) < 0:
                violations.append(Violation(NEGATIVE_DEMAND, c.name, f"{dim}={getattr(c, dim)}"))

    names = {c.name for c in topology.components}
    valid_edges = []
    for a, b in topology.edges:
        bad = False
        for end in (a, b):
            if end not in names:
                violations.append(Violation(UNKNOWN_ENDPOINT, f"{a}->{b}", f"{end!r} is not a component"))
                bad = True
        if a == b:
            violations.append(Violation(SELF_LOOP, f"{a}->{b}"))
            bad = True
        if not bad:
            valid_edges.append((a, b))

    spouts = [c.name for c in topology.components if c.is_spout]
    if not spouts:
        violations.append(Violation(NO_SPOUT, topology.id, "topology needs at least one spout"))
    spout_set = set(spouts)
    for a, b in valid_edges:
        if b in spout_set:
            violations.append(Violation(SPOUT_IN_DEGREE, b, f"edge {a}->{b} enters a spout"))

    adj: dict[str, list[str]] = {n: [] for n in names}
    for a, b in valid_edges:
        adj[a].append(b)
    reached = set(spouts)
    frontier = deque(spouts)
    while frontier:
        n = frontier.popleft()
        for m in adj.get(n, ()):
            if m not in reached:
                reached.add(m)
                frontier.append(m)
    for c in topology.components:
        if c.name not in reached and not c.is_spout:
            violations.append(Violation(UNREACHABLE, c.name, "not reachable from any spout"))
    return violations


def require_valid(topology: Topology) -> None:
    violations = validate(topology)
    if violations:
        raise TopologyError(violations)


def tasks_of(topology: Topology) -> list[Task]:
    """All tasks, component by component in declaration order, index ascending."""
    require_valid(topology)
    return [
        Task(c.name, i, c.demand)
        for c in topology.components
        for i in range(c.parallelism)
    ]


# -- spec files --------------------------------------------------------------


def topology_from_dict(doc: Mapping) -> Topology:
    try:
        components = [
            Component(
                name=str(item["name"]),
                kind=Kind(str(item.get("kind", "bolt")).lower()),
                parallelism=item.get("parallelism", 1),
                cpu=float(item.get("cpu", 0.0)),
                mem=float(item.get("mem", 0.0)),
                bw=float(item.get("bw", 0.0)),
            )
            for item in doc["components"]
        ]
        edges = [(str(a), str(b)) for a, b in doc.get("edges", [])]
        return Topology(id=str(doc.get("id", "topology")), components=tuple(components), edges=tuple(edges))
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecFormatError(f"malformed topology spec: {exc}") from exc


def topology_to_dict(topology: Topology) -> dict:
    return {
        "id": topology.id,
        "components": [
            {
                "name": c.name,
                "kind": c.kind.value,
                "parallelism": c.parallelism,
                "cpu": c.cpu,
                "mem": c.mem,
                "bw": c.bw,
            }
            for c in topology.components
        ],
        "edges": [[a, b] for a, b in topology.edges],
    }


def load_topology(path: str | Path) -> Topology:
    path = Path(path)
    if not path.is_file():
        raise MissingInput(f"topology spec not found: {path}")
    with path.open() as fh:
        return topology_from_dict(json.load(fh))


def dump_topology(topology: Topology, path: str | Path | None = None) -> str:
    text = json.dumps(topology_to_dict(topology), indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def with_demand(topology: Topology, demand: ResourceVector, names: Iterable[str] | None = None) -> Topology:
    """Copy of ``topology`` with the per-task demand replaced on ``names`` (all by default)."""
    targets = set(names) if names is not None else None
    comps = tuple(
        Component(c.name, c.kind, c.parallelism, demand.cpu, demand.mem, demand.bw)
        if targets is None or c.name in targets
        else c
        for c in topology.components
    )
    return Topology(topology.id, comps, topology.edges)


def component_names(components: Sequence[Component]) -> list[str]:
    return [c.name for c in components]
