"""
Scheduler comparison
====================

Using the experiment runner to compare schedulers on the shipped fixtures.

"""

##############################################################################
# Experiment specs
# ----------------
#
# An :class:`~rstorm.bench.experiment.ExperimentSpec` names a topology
# (a generator such as ``star:2,2,4`` or a topology file), a cluster and a
# workload. Repetitions use seeds derived from the base seed, so a report
# is fully reproducible.

from rstorm.bench import ExperimentSpec, run_experiment

##############################################################################
# Network-bound micro-benchmarks
# ------------------------------
#
# With negligible processing time, keeping communicating tasks on the same
# node or rack pays off directly in throughput.

for topo in ["linear:4,4", "diamond:3,4", "star:2,2,4"]:
    report = run_experiment(ExperimentSpec(topo, "2x6", "network-bound", repetitions=2))
    print(f"{report.topology_id:<14} throughput ratio {report.throughput_ratio:.2f}")

##############################################################################
# CPU-bound micro-benchmarks
# --------------------------
#
# When each tuple needs real processing, the resource-aware scheduler
# packs tasks onto about half the cluster and matches the baseline's
# throughput. The utilization ratio compares its used nodes against the
# baseline's whole cluster.

for topo in ["linear:4,4", "diamond:3,4"]:
    report = run_experiment(ExperimentSpec(topo, "2x6", "cpu-bound"))
    rs, rr = report.results["rstorm"], report.results["round_robin"]
    print(
        f"{report.topology_id:<14} nodes {rs.nodes_used} vs {rr.nodes_used}  "
        f"throughput {rs.throughput_mean:.0f} vs {rr.throughput_mean:.0f}  "
        f"utilization ratio {report.utilization_ratio:.2f}"
    )

##############################################################################
# An over-subscribed node
# -----------------------
#
# The ``hotspot`` cluster contains a memory-rich node with almost no spare
# CPU. Round-robin happily puts tasks there and the whole pipeline slows to
# that node's pace.

report = run_experiment(ExperimentSpec("hotspot", "hotspot", "hotspot"))
for name, r in report.results.items():
    print(f"{name:<12} {r.throughput_mean:7.1f} tuples/10s on {r.nodes_used} nodes")
print("full report as JSON:", len(report.to_json()), "characters")
