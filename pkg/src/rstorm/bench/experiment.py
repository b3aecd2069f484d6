"""Experiment runner comparing the resource-aware scheduler with round-robin."""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from ..cluster import Cluster, ClusterState
from ..scheduler import CommCost, SchedulerConfig, communication_cost, memory_overcommit, schedule_many
from ..simulator import SimReport, WorkloadModel, simulate_many, utilization_summary
from ..topology import Topology, require_valid, with_demand
from .fixtures import load_fixture_cluster, load_fixture_topology, load_fixture_workload
from .generators import GENERATORS, is_generator_spec, parse_generator

SCHEDULERS = ("rstorm", "round_robin")


@dataclass(frozen=True)
class ExperimentSpec:
    """What to run: a topology source, a cluster, a workload and the schedulers to compare.

    ``topology`` is a generator spec such as ``"linear:4,4"`` or a topology
    file / fixture name. ``duration=None`` uses the workload's default.
    """

    topology: str
    cluster: str
    workload: str
    schedulers: tuple[str, ...] = SCHEDULERS
    duration: float | None = None
    seed: int = 0
    repetitions: int = 1
    config: SchedulerConfig = SchedulerConfig()

    def __post_init__(self):
        object.__setattr__(self, "schedulers", tuple(self.schedulers))
        if not self.schedulers:
            raise ValueError("at least one scheduler is required")
        unknown = set(self.schedulers) - set(SCHEDULERS)
        if unknown:
            raise ValueError(f"unknown schedulers {sorted(unknown)}; choose from {SCHEDULERS}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass
class SchedulerResult:
    scheduler: str
    schedule: dict
    nodes_used: int
    comm_cost: CommCost
    unschedulable: list[str] = field(default_factory=list)
    memory_overcommit: dict[str, float] = field(default_factory=dict)
    throughput_mean: float | None = None
    throughput_std: float | None = None
    q_per_sink: dict[str, float] = field(default_factory=dict)
    utilization_all: float | None = None
    utilization_used: float | None = None
    runs: list[SimReport] = field(default_factory=list)

    @property
    def simulated(self) -> bool:
        return self.throughput_mean is not None

    def to_dict(self) -> dict:
        return {
            "scheduler": self.scheduler,
            "schedule": self.schedule,
            "nodes_used": self.nodes_used,
            "comm_cost": self.comm_cost.to_dict(),
            "unschedulable": list(self.unschedulable),
            "memory_overcommit": dict(self.memory_overcommit),
            "throughput_mean": self.throughput_mean,
            "throughput_std": self.throughput_std,
            "q_per_sink": dict(self.q_per_sink),
            "utilization_all": self.utilization_all,
            "utilization_used": self.utilization_used,
            "runs": [r.to_dict() for r in self.runs],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> SchedulerResult:
        return cls(
            scheduler=doc["scheduler"],
            schedule=doc["schedule"],
            nodes_used=int(doc["nodes_used"]),
            comm_cost=CommCost.from_dict(doc["comm_cost"]),
            unschedulable=list(doc["unschedulable"]),
            memory_overcommit={k: float(v) for k, v in doc["memory_overcommit"].items()},
            throughput_mean=doc["throughput_mean"],
            throughput_std=doc["throughput_std"],
            q_per_sink={k: float(v) for k, v in doc["q_per_sink"].items()},
            utilization_all=doc["utilization_all"],
            utilization_used=doc["utilization_used"],
            runs=[SimReport.from_dict(r) for r in doc["runs"]],
        )


@dataclass
class ComparisonReport:
    topology_id: str
    cluster: str
    workload: str
    seed: int
    repetitions: int
    results: dict[str, SchedulerResult]
    # rstorm / round_robin mean throughput
    throughput_ratio: float | None = None
    # rstorm used-node utilization / round_robin all-node utilization
    utilization_ratio: float | None = None

    @property
    def hard_constraint_ok(self) -> bool:
        return not any(r.memory_overcommit for r in self.results.values())

    @property
    def fully_scheduled(self) -> bool:
        return not any(r.unschedulable for r in self.results.values())

    def to_dict(self) -> dict:
        return {
            "topology_id": self.topology_id,
            "cluster": self.cluster,
            "workload": self.workload,
            "seed": self.seed,
            "repetitions": self.repetitions,
            "results": {k: v.to_dict() for k, v in self.results.items()},
            "throughput_ratio": self.throughput_ratio,
            "utilization_ratio": self.utilization_ratio,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> ComparisonReport:
        return cls(
            topology_id=doc["topology_id"],
            cluster=doc["cluster"],
            workload=doc["workload"],
            seed=int(doc["seed"]),
            repetitions=int(doc["repetitions"]),
            results={k: SchedulerResult.from_dict(v) for k, v in doc["results"].items()},
            throughput_ratio=doc["throughput_ratio"],
            utilization_ratio=doc["utilization_ratio"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def resolve_topology(source: str, workload: WorkloadModel | None = None) -> Topology:
    """Generator spec or topology file. Generated micro-benchmarks take the workload's demand."""
    if is_generator_spec(source):
        name = source.partition(":")[0].strip().lower()
        demand = workload.demand if workload is not None and name in GENERATORS else None
        topo = parse_generator(source, demand)
    else:
        topo = load_fixture_topology(source)
    require_valid(topo)
    return topo


def _derived_seeds(seed: int, repetitions: int) -> list[int]:
    return [seed * 1000 + i for i in range(repetitions)]


def run_topologies(
    topologies: Sequence[Topology],
    cluster: Cluster,
    model: WorkloadModel,
    schedulers: Sequence[str] = SCHEDULERS,
    duration: float | None = None,
    seed: int = 0,
    repetitions: int = 1,
    config: SchedulerConfig = SchedulerConfig(),
    cluster_name: str = "cluster",
    workload_name: str | None = None,
) -> list[ComparisonReport]:
    """Schedule ``topologies`` in order against one chained cluster state per
    scheduler, simulate them together, and report per topology."""
    per_sched: dict[str, list[SchedulerResult]] = {}
    for name in schedulers:
        scheds, _ = schedule_many(topologies, ClusterState(cluster), name, config)
        overcommit = memory_overcommit(scheds, cluster)
        results = []
        for sched, topo in zip(scheds, topologies):
            cost = communication_cost(sched, topo, cluster) if sched.complete else CommCost()
            results.append(
                SchedulerResult(
                    scheduler=name,
                    schedule=sched.to_dict(),
                    nodes_used=len(sched.nodes_used),
                    comm_cost=cost,
                    unschedulable=[t.key for t in sched.unschedulable],
                    memory_overcommit={n: v for n, v in overcommit.items() if n in sched.nodes_used},
                )
            )
        if all(s.complete for s in scheds):
            runs_per_topo: list[list[SimReport]] = [[] for _ in topologies]
            for s in _derived_seeds(seed, repetitions):
                reports = simulate_many(list(zip(scheds, topologies)), cluster, model, duration, s)
                for k, rep in enumerate(reports):
                    runs_per_topo[k].append(rep)
            for res, runs in zip(results, runs_per_topo):
                tps = [r.throughput for r in runs]
                res.runs = runs
                res.throughput_mean = statistics.fmean(tps)
                res.throughput_std = statistics.pstdev(tps)
                res.q_per_sink = {
                    sink: statistics.fmean(r.q_per_sink[sink] for r in runs) for sink in runs[0].q_per_sink
                }
                res.utilization_all = statistics.fmean(utilization_summary(r) for r in runs)
                res.utilization_used = statistics.fmean(utilization_summary(r, used_nodes_only=True) for r in runs)
        per_sched[name] = results

    reports = []
    for k, topo in enumerate(topologies):
        results = {name: per_sched[name][k] for name in schedulers}
        report = ComparisonReport(
            topology_id=topo.id,
            cluster=cluster_name,
            workload=workload_name or model.name,
            seed=seed,
            repetitions=repetitions,
            results=results,
        )
        rs, rr = results.get("rstorm"), results.get("round_robin")
        if rs is not None and rr is not None and rs.simulated and rr.simulated:
            if rr.throughput_mean > 0:
                report.throughput_ratio = rs.throughput_mean / rr.throughput_mean
            if rr.utilization_all > 0:
                report.utilization_ratio = rs.utilization_used / rr.utilization_all
        reports.append(report)
    return reports


def run_experiment(spec: ExperimentSpec) -> ComparisonReport:
    return run_chained([spec])[0]


def run_chained(specs: Sequence[ExperimentSpec]) -> list[ComparisonReport]:
    """Run several topologies on one cluster, scheduled one after another.

    All specs must agree on everything except the topology.
    """
    if not specs:
        raise ValueError("no experiments given")
    first = specs[0]
    for s in specs[1:]:
        if (s.cluster, s.workload, s.schedulers, s.duration, s.seed, s.repetitions, s.config) != (
            first.cluster, first.workload, first.schedulers, first.duration, first.seed, first.repetitions, first.config,
        ):
            raise ValueError("chained experiments must share cluster, workload, schedulers and run settings")
    cluster = load_fixture_cluster(first.cluster)
    model = load_fixture_workload(first.workload)
    topologies = [resolve_topology(s.topology, model) for s in specs]
    return run_topologies(
        topologies,
        cluster,
        model,
        first.schedulers,
        first.duration,
        first.seed,
        first.repetitions,
        first.config,
        cluster_name=Path(first.cluster).stem,
        workload_name=model.name,
    )
