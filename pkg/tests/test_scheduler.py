import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_selection, random_cluster, random_selection_fixture, random_topology
from rstorm.bench.generators import gen_diamond, gen_linear, gen_star
from rstorm.cluster import Cluster, ClusterState, Node, Rack
from rstorm.errors import TopologyError, Unschedulable
from rstorm.scheduler import (
    Schedule,
    SchedulerConfig,
    bfs_traversal,
    communication_cost,
    distance,
    memory_overcommit,
    node_selection,
    round_robin_schedule,
    schedule,
    schedule_many,
    task_selection,
)
from rstorm.topology import Component, ResourceVector, Task, Topology, tasks_of

NET_DEMAND = ResourceVector(mem=512, cpu=10)


def task(mem=0.0, cpu=0.0, name="t", index=0):
    return Task(name, index, ResourceVector(mem=mem, cpu=cpu))


def chain(*parallelisms, mem=0.0, cpu=0.0):
    names = [f"c{i}" for i in range(len(parallelisms))]
    comps = tuple(
        Component(n, "spout" if i == 0 else "bolt", p, cpu=cpu, mem=mem) for i, (n, p) in enumerate(zip(names, parallelisms))
    )
    return Topology("chain", comps, tuple(zip(names, names[1:])))


def ffd_fits(topology, state):
    """First-fit-decreasing on memory alone."""
    free = [state[n.id].mem for n in state.cluster.nodes]
    for t in sorted(tasks_of(topology), key=lambda t: -t.demand.mem):
        for i, f in enumerate(free):
            if f >= t.demand.mem:
                free[i] -= t.demand.mem
                break
        else:
            return False
    return True


class TestBfsTraversal:
    def test_linear(self):
        t = gen_linear(4, 1)
        assert bfs_traversal(t) == ["spout", "bolt1", "bolt2", "bolt3"]

    def test_diamond(self):
        assert bfs_traversal(gen_diamond(3, 1)) == ["spout", "bolt1", "bolt2", "bolt3", "sink"]

    def test_single_spout(self):
        t = Topology("s", (Component("spout", "spout"),), ())
        assert bfs_traversal(t) == ["spout"]

    def test_multiple_spouts_seed_in_declaration_order(self):
        t = gen_star(2, 2, 1)
        assert bfs_traversal(t) == ["spout1", "spout2", "center", "sink1", "sink2"]

    def test_edge_declaration_order_breaks_ties(self):
        t = Topology(
            "t",
            (Component("s", "spout"), Component("a", "bolt"), Component("b", "bolt")),
            (("s", "b"), ("s", "a")),
        )
        assert bfs_traversal(t) == ["s", "b", "a"]

    def test_invalid(self):
        with pytest.raises(TopologyError):
            bfs_traversal(Topology("t", (Component("b", "bolt"),), ()))


class TestTaskSelection:
    def test_even(self):
        assert [str(t) for t in task_selection(chain(2, 2))] == ["c0[0]", "c1[0]", "c0[1]", "c1[1]"]

    def test_uneven(self):
        assert [str(t) for t in task_selection(chain(1, 3))] == ["c0[0]", "c1[0]", "c1[1]", "c1[2]"]

    def test_single(self):
        assert [str(t) for t in task_selection(chain(1))] == ["c0[0]"]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_task_selection_is_a_permutation(seed):
    topo = random_topology(random.Random(seed))
    order = task_selection(topo)
    assert sorted(order) == sorted(tasks_of(topo))
    assert order == task_selection(topo)


class TestDistance:
    def setup_method(self):
        self.cluster = Cluster.uniform(2, 1, cpu=100, mem=2048)

    def test_all_zero(self):
        state = ClusterState(self.cluster, {"r1n1": ResourceVector(0, 0), "r2n1": ResourceVector(0, 0)})
        assert distance(task(), "r1n1", "r1n1", state) == 0.0

    def test_same_node(self):
        state = ClusterState(self.cluster, {"r1n1": ResourceVector(1024, 100), "r2n1": ResourceVector(1024, 100)})
        d = distance(task(512, 50), "r1n1", "r1n1", state)
        assert d == pytest.approx(math.sqrt(264644), abs=1e-9)
        assert d == pytest.approx(514.44, abs=0.005)

    def test_other_rack_adds_unsquared_term(self):
        state = ClusterState(self.cluster, {"r1n1": ResourceVector(1024, 100), "r2n1": ResourceVector(1024, 100)})
        d = distance(task(512, 50), "r2n1", "r1n1", state)
        assert d == pytest.approx(math.sqrt(264648), abs=1e-9)
        # the +4 inside the root moves the value by < 0.004
        assert 0 < d - math.sqrt(264644) < 0.004

    def test_weights(self):
        state = ClusterState(self.cluster, {"r1n1": ResourceVector(10, 20), "r2n1": ResourceVector(10, 20)})
        cfg = SchedulerConfig(2, 3, 5)
        assert distance(task(4, 16), "r2n1", "r1n1", state, cfg) == pytest.approx(math.sqrt(2 * 36 + 3 * 16 + 5 * 4))


class TestNodeSelection:
    def test_first_task_goes_to_first_node(self, cluster_2x6):
        node, ref = node_selection(task(512, 10), ClusterState(cluster_2x6))
        assert node == ref == "r1n1"

    def test_ref_wins_when_availability_equal(self):
        cluster = Cluster.uniform(2, 2, cpu=100, mem=2048)
        state = ClusterState(cluster, {n.id: ResourceVector(1024, 50) for n in cluster.nodes})
        node, ref = node_selection(task(512, 50), state, ref="r1n2")
        assert (node, ref) == ("r1n2", "r1n2")

    def test_unschedulable(self, cluster_2x6):
        with pytest.raises(Unschedulable):
            node_selection(task(4096), ClusterState(cluster_2x6))

    def test_first_task_falls_through_when_ref_lacks_memory(self):
        cluster = Cluster((Rack("r", (Node("big", "r", 400, 600), Node("small", "r", 100, 1024))),))
        # big: 600/1624 + 400/500 beats small: 1024/1624 + 100/500
        node, ref = node_selection(task(700), ClusterState(cluster))
        assert ref == "big"
        assert node == "small"

    def test_exact_memory_fit_is_feasible(self):
        cluster = Cluster((Rack("r", (Node("n", "r", 100, 512),)),))
        assert node_selection(task(512), ClusterState(cluster))[0] == "n"


def test_oracle_equivalence_500():
    rng = random.Random(20240501)
    checked = 0
    for _ in range(500):
        t, state, ref, cfg = random_selection_fixture(rng)
        expected = brute_force_selection(t, state, ref, cfg)
        if expected is None:
            with pytest.raises(Unschedulable):
                node_selection(t, state, ref, cfg)
        else:
            assert node_selection(t, state, ref, cfg) == (expected, ref)
            checked += 1
    assert checked > 300


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.5, 2.0, 7.0, 1000.0]))
def test_weight_scaling_preserves_choice(seed, k):
    t, state, ref, cfg = random_selection_fixture(random.Random(seed))
    try:
        base = node_selection(t, state, ref, cfg)
    except Unschedulable:
        with pytest.raises(Unschedulable):
            node_selection(t, state, ref, cfg.scaled(k))
        return
    assert node_selection(t, state, ref, cfg.scaled(k)) == base


class TestSchedule:
    def test_linear_single_tasks_land_on_ref(self):
        cluster = Cluster.uniform(1, 2, cpu=400, mem=8192)
        sched, _ = schedule(chain(1, 1, 1, 1, mem=128, cpu=10), ClusterState(cluster))
        assert sched.complete
        assert set(sched.assignments.values()) == {sched.ref_node}

    def test_no_memory_anywhere(self, cluster_2x6):
        state = ClusterState(cluster_2x6, {n.id: ResourceVector(0, 100) for n in cluster_2x6.nodes})
        sched, after = schedule(chain(2, 2, mem=64), state)
        assert sched.assignments == {}
        assert len(sched.unschedulable) == 4
        assert after.avail == state.avail

    def test_diamond_fits_in_one_rack(self, cluster_2x6):
        topo = gen_diamond(3, 4, NET_DEMAND)
        assert topo.total_demand.mem <= 6 * 2048
        sched, _ = schedule(topo, ClusterState(cluster_2x6))
        assert communication_cost(sched, topo, cluster_2x6).inter_rack == 0

    def test_input_state_untouched(self, cluster_2x6):
        state = ClusterState(cluster_2x6)
        before = dict(state.avail)
        schedule(gen_linear(4, 4, NET_DEMAND), state)
        assert state.avail == before

    def test_returned_state_matches_assignments(self, cluster_2x6):
        topo = gen_star(2, 2, 4, NET_DEMAND)
        sched, after = schedule(topo, ClusterState(cluster_2x6))
        for node in cluster_2x6.nodes:
            placed = sched.tasks_on(node.id)
            assert after[node.id].mem == node.mem_capacity - sum(t.demand.mem for t in placed)
            assert after[node.id].cpu == node.cpu_capacity - sum(t.demand.cpu for t in placed)

    def test_deterministic_bytes(self, cluster_2x6):
        topo = gen_diamond(3, 4, NET_DEMAND)
        docs = {json.dumps(schedule(topo, ClusterState(cluster_2x6))[0].to_dict()) for _ in range(3)}
        assert len(docs) == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_schedule_never_overcommits(seed):
    rng = random.Random(seed)
    topo, cluster = random_topology(rng), random_cluster(rng)
    sched, after = schedule(topo, ClusterState(cluster))
    assert memory_overcommit([sched], cluster) == {}
    assert sorted(list(sched.assignments) + sched.unschedulable) == sorted(tasks_of(topo))
    assert all(after[n.id].mem >= 0 for n in cluster.nodes)


def test_ffd_counterexample():
    # The greedy parks the first spout task on the most-resourced node, which
    # then cannot host the 1024 MB bolt although a memory-only packing exists.
    cluster = Cluster((Rack("r0", (Node("r0n0", "r0", 100, 1024), Node("r0n1", "r0", 100, 512))),))
    topo = Topology(
        "cx",
        (Component("c0", "spout", 3, cpu=10, mem=64), Component("c1", "bolt", 1, cpu=10, mem=1024)),
        (("c0", "c1"),),
    )
    state = ClusterState(cluster)
    assert ffd_fits(topo, state)
    sched, _ = schedule(topo, state)
    assert [str(t) for t in sched.unschedulable] == ["c1[0]"]
    assert memory_overcommit([sched], cluster) == {}


@pytest.mark.xfail(
    reason="greedy placement is not complete: see test_ffd_counterexample; the safety half of the property still holds",
    strict=True,
)
def test_no_unschedulable_when_ffd_fits():
    rng = random.Random(7)
    failures = 0
    for _ in range(4000):
        topo, cluster = random_topology(rng), random_cluster(rng)
        state = ClusterState(cluster)
        if ffd_fits(topo, state) and not schedule(topo, state)[0].complete:
            failures += 1
    assert failures == 0


class TestRoundRobin:
    def test_cycles(self):
        cluster = Cluster.uniform(1, 2)
        sched, _ = round_robin_schedule(chain(4), ClusterState(cluster))
        assert list(sched.assignments.values()) == ["r1n1", "r1n2", "r1n1", "r1n2"]
        assert sched.ref_node == "r1n1"

    def test_one_per_node(self):
        cluster = Cluster.uniform(2, 6)
        sched, _ = round_robin_schedule(chain(6, 6, mem=100), ClusterState(cluster))
        assert sorted(sched.assignments.values()) == sorted(n.id for n in cluster.nodes)

    def test_skips_node_without_memory(self):
        cluster = Cluster((Rack("r", (Node("big", "r", 100, 4096), Node("tiny", "r", 100, 1024))),))
        state = ClusterState(cluster, {"big": ResourceVector(4096, 100), "tiny": ResourceVector(0, 100)})
        sched, _ = round_robin_schedule(chain(3, mem=256), state)
        assert list(sched.assignments.values()) == ["big", "big", "big"]

    def test_ignores_cpu(self):
        cluster = Cluster.uniform(1, 2, cpu=10)
        sched, after = round_robin_schedule(chain(4, cpu=50), ClusterState(cluster))
        assert sched.complete
        assert after["r1n1"].cpu == 10 - 100

    def test_unschedulable(self):
        sched, _ = round_robin_schedule(chain(2, mem=4096), ClusterState(Cluster.uniform(1, 2)))
        assert len(sched.unschedulable) == 2


class TestCommunicationCost:
    def test_single_node(self, cluster_2x6):
        topo = chain(2, 2)
        sched, _ = schedule(topo, ClusterState(cluster_2x6))
        cost = communication_cost(sched, topo, cluster_2x6)
        assert (cost.inter_rack, cost.intra_rack, cost.weighted_sum) == (0, 0, 0)
        assert cost.intra_node == 4

    def test_cross_rack_pair(self):
        cluster = Cluster.uniform(2, 1)
        topo = chain(1, 1)
        tasks = tasks_of(topo)
        sched = Schedule("chain", {tasks[0]: "r1n1", tasks[1]: "r2n1"})
        cost = communication_cost(sched, topo, cluster)
        assert cost.inter_rack == 1
        assert cost.weighted_sum == 4

    def test_round_robin_linear_crosses_racks(self, cluster_2x6):
        topo = gen_linear(4, 4, NET_DEMAND)
        sched, _ = round_robin_schedule(topo, ClusterState(cluster_2x6))
        assert communication_cost(sched, topo, cluster_2x6).inter_rack > 0

    def test_partial_schedule_rejected(self, cluster_2x6):
        topo = chain(2)
        with pytest.raises(ValueError):
            communication_cost(Schedule("chain"), topo, cluster_2x6)


@pytest.mark.parametrize("topo", [gen_linear(4, 4, NET_DEMAND), gen_diamond(3, 4, NET_DEMAND), gen_star(2, 2, 4, NET_DEMAND)], ids=["linear", "diamond", "star"])
def test_locality_dominance(topo, cluster_2x6):
    rs, _ = schedule(topo, ClusterState(cluster_2x6))
    rr, _ = round_robin_schedule(topo, ClusterState(cluster_2x6))
    rs_cost = communication_cost(rs, topo, cluster_2x6)
    rr_cost = communication_cost(rr, topo, cluster_2x6)
    assert rs_cost.weighted_sum <= rr_cost.weighted_sum
    if rr_cost.inter_rack >= 1:
        assert rs_cost.weighted_sum < rr_cost.weighted_sum


class TestScheduleMany:
    def test_chained_state_and_separate_refs(self):
        cluster = Cluster.uniform(2, 2, cpu=100, mem=2048)
        a = chain(4, mem=512)
        b = chain(4, mem=512)
        scheds, final = schedule_many([a, b], ClusterState(cluster))
        assert scheds[0].ref_node != scheds[1].ref_node
        assert sum(final[n.id].mem for n in cluster.nodes) == 4 * 2048 - 8 * 512
        assert memory_overcommit(scheds, cluster) == {}

    def test_unknown_scheduler(self):
        with pytest.raises(ValueError):
            schedule_many([chain(1)], ClusterState(Cluster.uniform(1, 1)), "fifo")

    def test_overcommit_detector(self):
        cluster = Cluster.uniform(1, 1, mem=1000)
        t1, t2 = task(600, index=0), task(600, index=1)
        assert memory_overcommit([Schedule("x", {t1: "r1n1", t2: "r1n1"})], cluster) == {"r1n1": 200}
