"""
Several topologies on one cluster
=================================

Scheduling two production-style topologies one after the other.

"""

##############################################################################
# Chained cluster state
# ---------------------
#
# :func:`~rstorm.scheduler.schedule` returns the residual cluster state
# after placement. Feeding it into the next call schedules a second
# topology on what is left. Each topology picks its own reference node.

from rstorm import ClusterState
from rstorm.bench.fixtures import load_fixture_cluster
from rstorm.bench.generators import gen_pageload, gen_processing
from rstorm.scheduler import memory_overcommit, schedule_many

cluster = load_fixture_cluster("2x12")
topologies = [gen_pageload(), gen_processing()]
schedules, final = schedule_many(topologies, ClusterState(cluster))

for s in schedules:
    print(f"{s.topology_id:<12} ref {s.ref_node}  nodes {len(s.nodes_used)}  unschedulable {len(s.unschedulable)}")
print("over-committed nodes:", memory_overcommit(schedules, cluster) or "none")

##############################################################################
# Simulating both at once
# -----------------------
#
# Both topologies share the cluster's CPUs and links in one simulation.
# The chained runner does the scheduling and simulation for each scheduler
# and reports per topology.

from rstorm.bench import ExperimentSpec, run_chained

reports = run_chained([
    ExperimentSpec("pageload", "2x12", "production"),
    ExperimentSpec("processing", "2x12", "production"),
])
for r in reports:
    rs, rr = r.results["rstorm"], r.results["round_robin"]
    print(f"{r.topology_id:<12} rstorm {rs.throughput_mean:.0f}  round_robin {rr.throughput_mean:.0f} tuples/10s")
