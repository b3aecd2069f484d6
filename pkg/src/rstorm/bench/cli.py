"""Command line entry point: ``rstorm {schedule,simulate,compare,gen}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..cluster import ClusterState
from ..errors import MissingInput, RStormError, SpecFormatError, TopologyError
from ..scheduler import SchedulerConfig, communication_cost, round_robin_schedule, schedule
from ..simulator import simulate, utilization_summary
from ..topology import dump_topology, validate
from .experiment import SCHEDULERS, ComparisonReport, ExperimentSpec, resolve_topology, run_chained
from .fixtures import load_fixture_cluster, load_fixture_workload
from .generators import parse_generator

EXIT_OK = 0
EXIT_VALIDATION = 3
EXIT_UNSCHEDULABLE = 4
EXIT_MISSING_INPUT = 5
EXIT_HARD_CONSTRAINT = 6


def _write(doc: dict, out: str | None) -> None:
    if out:
        Path(out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _config(args) -> SchedulerConfig:
    return SchedulerConfig(args.weight_mem, args.weight_cpu, args.weight_bw)


def _load_topology(args):
    workload = load_fixture_workload(args.workload) if getattr(args, "workload", None) else None
    return resolve_topology(args.topology, workload)


def cmd_schedule(args) -> int:
    topo = _load_topology(args)
    cluster = load_fixture_cluster(args.cluster)
    state = ClusterState(cluster)
    if args.scheduler == "rstorm":
        sched, _ = schedule(topo, state, _config(args))
    else:
        sched, _ = round_robin_schedule(topo, state)

    print(f"topology {topo.id}  scheduler {args.scheduler}  ref node {sched.ref_node}")
    print(f"{'task':<24} node")
    for task, node in sched.assignments.items():
        print(f"{str(task):<24} {node}")
    doc = {"schedule": sched.to_dict()}
    if sched.unschedulable:
        print("unschedulable:", ", ".join(str(t) for t in sched.unschedulable))
        _write(doc, args.out)
        return EXIT_UNSCHEDULABLE
    cost = communication_cost(sched, topo, cluster)
    print(
        f"pairs intra_node={cost.intra_node} intra_rack={cost.intra_rack} "
        f"inter_rack={cost.inter_rack} weighted={cost.weighted_sum:g}"
    )
    doc["comm_cost"] = cost.to_dict()
    _write(doc, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    topo = _load_topology(args)
    cluster = load_fixture_cluster(args.cluster)
    model = load_fixture_workload(args.workload)
    state = ClusterState(cluster)
    if args.scheduler == "rstorm":
        sched, _ = schedule(topo, state, _config(args))
    else:
        sched, _ = round_robin_schedule(topo, state)
    if sched.unschedulable:
        print("unschedulable:", ", ".join(str(t) for t in sched.unschedulable))
        return EXIT_UNSCHEDULABLE
    report = simulate(sched, topo, cluster, model, args.duration, args.seed)
    print(f"topology {topo.id}  scheduler {args.scheduler}  workload {model.name}")
    print(f"throughput {report.throughput:.1f} tuples/10s  ({report.rate:.1f} tuples/s)")
    for sink, q in report.q_per_sink.items():
        print(f"  sink {sink:<20} {q:.1f} tuples/s")
    print(
        f"cpu utilization  all nodes {utilization_summary(report):.3f}  "
        f"used nodes {utilization_summary(report, True):.3f}  ({len(report.used_nodes)} used)"
    )
    _write({"schedule": sched.to_dict(), "report": report.to_dict()}, args.out)
    return EXIT_OK


def _fmt(v, spec=".1f"):
    return "-" if v is None else format(v, spec)


def print_comparison(report: ComparisonReport) -> None:
    print(f"topology {report.topology_id}  cluster {report.cluster}  workload {report.workload}")
    print(f"{'scheduler':<12} {'tput/10s':>10} {'std':>8} {'nodes':>6} {'util(all)':>10} {'util(used)':>11} {'inter-rack':>11} {'weighted':>9}")
    for name, r in report.results.items():
        print(
            f"{name:<12} {_fmt(r.throughput_mean):>10} {_fmt(r.throughput_std):>8} {r.nodes_used:>6} "
            f"{_fmt(r.utilization_all, '.3f'):>10} {_fmt(r.utilization_used, '.3f'):>11} "
            f"{r.comm_cost.inter_rack:>11} {r.comm_cost.weighted_sum:>9g}"
        )
        if r.unschedulable:
            print(f"  unschedulable: {', '.join(r.unschedulable)}")
    if report.throughput_ratio is not None:
        print(f"throughput ratio rstorm/round_robin {report.throughput_ratio:.3f}")
        print(f"utilization ratio rstorm(used)/round_robin(all) {_fmt(report.utilization_ratio, '.3f')}")


def cmd_compare(args) -> int:
    schedulers = tuple(s.strip() for s in args.schedulers.split(",") if s.strip())
    specs = [
        ExperimentSpec(
            topology=t,
            cluster=args.cluster,
            workload=args.workload,
            schedulers=schedulers,
            duration=args.duration,
            seed=args.seed,
            repetitions=args.repetitions,
            config=_config(args),
        )
        for t in args.topology
    ]
    reports = run_chained(specs)
    for r in reports:
        print_comparison(r)
    doc = reports[0].to_dict() if len(reports) == 1 else {"reports": [r.to_dict() for r in reports]}
    _write(doc, args.out)
    if not all(r.hard_constraint_ok for r in reports):
        print("hard constraint violated: memory over-committed", file=sys.stderr)
        return EXIT_HARD_CONSTRAINT
    if not all(r.fully_scheduled for r in reports):
        return EXIT_UNSCHEDULABLE
    return EXIT_OK


def cmd_gen(args) -> int:
    topo = parse_generator(args.spec)
    violations = validate(topo)
    if violations:
        raise TopologyError(violations)
    text = dump_topology(topo)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rstorm", description="Resource-aware topology scheduling and simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, workload_required):
        p.add_argument("--cluster", required=True, help="cluster spec file or fixture name (e.g. 2x6)")
        p.add_argument("--workload", required=workload_required, help="workload fixture name or file")
        p.add_argument("--out", help="write a machine-readable JSON document here")
        p.add_argument("--weight-mem", type=float, default=1.0)
        p.add_argument("--weight-cpu", type=float, default=1.0)
        p.add_argument("--weight-bw", type=float, default=1.0)

    p = sub.add_parser("schedule", help="print a schedule and its communication cost")
    p.add_argument("--topology", required=True, help="generator spec (linear:4,4) or topology file")
    p.add_argument("--scheduler", choices=SCHEDULERS, default="rstorm")
    common(p, False)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("simulate", help="schedule with one scheduler and simulate")
    p.add_argument("--topology", required=True)
    p.add_argument("--scheduler", choices=SCHEDULERS, default="rstorm")
    p.add_argument("--duration", type=float)
    p.add_argument("--seed", type=int, default=0)
    common(p, True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="compare schedulers; repeat --topology to chain several")
    p.add_argument("--topology", required=True, action="append")
    p.add_argument("--schedulers", default=",".join(SCHEDULERS))
    p.add_argument("--duration", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repetitions", type=int, default=1)
    common(p, True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen", help="emit a generated topology as a spec file")
    p.add_argument("spec", help="e.g. diamond:3,2")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MissingInput as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except TopologyError as exc:
        print("invalid topology:", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SpecFormatError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RStormError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
