"""
Simulating throughput
=====================

Running a scheduled topology through the discrete-event simulator.

"""

##############################################################################
# Workload models
# ---------------
#
# The simulator needs timing parameters: per-tuple CPU work, per-tier
# network delay, optional link capacities and the offered load. The
# shipped ``network-bound`` workload has almost no processing per tuple,
# so throughput is governed by how far tuples travel.

from rstorm import ClusterState, round_robin_schedule, schedule, simulate, utilization_summary
from rstorm.bench.fixtures import load_fixture_cluster, load_fixture_workload
from rstorm.bench.generators import gen_linear

model = load_fixture_workload("network-bound")
cluster = load_fixture_cluster("2x6")
topology = gen_linear(4, 4, model.demand)
print(model.network_delay)

##############################################################################
# One run per scheduler
# ---------------------
#
# Throughput is reported per 10 s window and averaged over the sink
# components. The first fifth of the run is treated as warmup and dropped.

for name, scheduler in [("rstorm", schedule), ("round_robin", round_robin_schedule)]:
    placement, _ = scheduler(topology, ClusterState(cluster))
    report = simulate(placement, topology, cluster, model, seed=0)
    print(
        f"{name:<12} {report.throughput:8.0f} tuples/10s  "
        f"cpu(all) {utilization_summary(report):.3f}  cpu(used) {utilization_summary(report, True):.3f}"
    )

##############################################################################
# Closed-form checks
# ------------------
#
# A single spout feeding a 20 ms sink on an otherwise idle node cannot
# exceed 50 tuples per second. The simulator should reproduce that bound.

from rstorm import Cluster, Component, Node, Rack, Schedule, Topology, WorkloadModel, tasks_of

pair = Topology("pair", (Component("spout", "spout", mem=64), Component("sink", "bolt", mem=64)), (("spout", "sink"),))
node = Cluster((Rack("r1", (Node.with_cores("a", "r1", 4, 4096),)),))
placement = Schedule("pair", dict(zip(tasks_of(pair), ["a", "a"])))
slow_sink = WorkloadModel(service_time={"spout": 0.001, "sink": 0.02})
print(f"{simulate(placement, pair, node, slow_sink, duration=20).rate:.2f} tuples/s")
