"""Resource-aware scheduling for stream-processing topologies.

Core pieces:

* :mod:`rstorm.topology` -- components, tasks, validation
* :mod:`rstorm.cluster` -- racks, nodes, distance ladder, residual state
* :mod:`rstorm.scheduler` -- resource-aware placement and round-robin baseline
* :mod:`rstorm.simulator` -- discrete-event throughput simulation
* :mod:`rstorm.bench` -- generators, experiment runner and CLI
"""

from .cluster import Cluster, ClusterState, Node, Rack, network_distance
from .errors import HardConstraintViolation, MissingInput, TopologyError, Unschedulable
from .scheduler import (
    CommCost,
    Schedule,
    SchedulerConfig,
    bfs_traversal,
    communication_cost,
    distance,
    node_selection,
    round_robin_schedule,
    schedule,
    task_selection,
)
from .simulator import SimReport, WorkloadModel, simulate, simulate_many, utilization_summary
from .topology import Component, Kind, ResourceVector, Task, Topology, tasks_of, validate

__version__ = "0.1.0"
