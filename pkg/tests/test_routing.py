import numpy as np
import pytest
from hypothesis import given, strategies as st

from picklab.geometry import build_layout, WarehouseSpec
from picklab.instance import illustrative_instance
from picklab.routing import (Item, Position, RoutingTask, Unsolved, brute_route, makespan,
                             order_makespan, route_batch, route_value)

LAY = build_layout(WarehouseSpec(aisles=3, shelves_per_aisle=6))
TD = LAY.dist * 5


def random_task(rng, end_at_depot):
    m = int(rng.integers(0, 7))
    nodes = rng.choice(LAY.slot_node, size=m)
    items = [Item(i, int(nodes[i]), int(rng.integers(0, 400)), i) for i in range(m)]
    u = int(rng.integers(0, LAY.n_nodes))
    if rng.random() < 0.5 and LAY.neighbors(u):
        v, w = LAY.neighbors(u)[0]
        k = int(rng.integers(1, w * 5)) if w * 5 > 1 else 0
        start = Position(u, v, k, w * 5 - k)
    else:
        start = Position.at(u)
    return RoutingTask(TD, items, start, int(rng.integers(0, 100)),
                       LAY.depot if end_at_depot else None, int(rng.integers(0, 40)))


@pytest.mark.parametrize("backend", ["numba", "numpy"])
def test_route_matches_brute_force(monkeypatch, backend):
    # 600 random tasks per backend: open and closed routes, on and off nodes
    monkeypatch.setenv("PICKLAB_KERNELS", backend)
    rng = np.random.default_rng(11)
    for k in range(600):
        task = random_task(rng, k % 2 == 0)
        r = route_batch(task)
        assert r.finish == brute_route(task) == route_value(task)
        # the returned visits replay to the stated finish
        t, pos = task.start_time, task.start
        for v in r.visits:
            t += pos.time_to(TD, v.item.node)
            assert v.arrival == t
            t = max(t, v.item.release) + task.pick_time
            assert v.completion == t
            pos = Position.at(v.item.node)
        if task.end is not None:
            t += pos.time_to(TD, task.end)
        assert t == r.finish


@given(st.integers(0, 2**32 - 1))
def test_release_monotonicity(seed):
    # later releases never make a route finish earlier
    rng = np.random.default_rng(seed)
    task = random_task(rng, True)
    if not task.items:
        return
    later = [Item(it.key, it.node, it.release + int(rng.integers(0, 50)), it.order) for it in task.items]
    task2 = RoutingTask(task.tdist, later, task.start, task.start_time, task.end, task.pick_time)
    assert route_value(task2) >= route_value(task)


def test_lexicographic_tie_break():
    # two items at the same node: identical cost either way, index 0 goes first
    n = int(LAY.slot_node[0])
    task = RoutingTask(TD, [Item("a", n), Item("b", n)], Position.at(LAY.depot), 0, LAY.depot)
    assert [v.item.key for v in route_batch(task).visits] == ["a", "b"]


def test_forced_last_item():
    a, b = int(LAY.slot_node[0]), int(LAY.slot_node[-1])
    task = RoutingTask(TD, [Item(0, a), Item(1, b)], Position.at(LAY.depot), 0, None)
    r = route_batch(task, last=0)
    assert r.visits[-1].item.key == 0
    assert r.finish == r.end_map[0]


def test_empty_task():
    task = RoutingTask(TD, [], Position.at(LAY.slot_node[3]), 10, LAY.depot)
    assert route_value(task) == 10 + TD[LAY.slot_node[3], LAY.depot]
    assert route_batch(task).visits == []


def test_batch_too_large():
    items = [Item(i, int(LAY.slot_node[i])) for i in range(5)]
    with pytest.raises(Unsolved) as e:
        route_value(RoutingTask(TD, items, Position.at(LAY.depot), limit=4))
    assert e.value.reason == "batch-too-large"


def test_position_helpers():
    p = Position(3, 4, 0, 7)
    assert p.is_node and p.node == 3 and p.normalized() == Position.at(3)
    q = Position(3, 4, 2, 5)
    assert not q.is_node
    with pytest.raises(ValueError):
        q.node
    assert q.to_json() == {"edge": [3, 4], "to_u": 2, "to_v": 5}


def test_illustrative_order_makespans():
    # o1 = {d2, j2}: a1-d2 = 4 and j2-a1 = 10 are quoted legs, d2-j2 detours via g1 (8)
    inst = illustrative_instance()
    assert order_makespan(inst, 0, "pcart") == 22
    assert order_makespan(inst, 0, "robot") <= order_makespan(inst, 0, "pcart")


@given(st.lists(st.integers(0, len(LAY.slot_node) - 1), min_size=1, max_size=6))
def test_open_path_shorter_than_tour(slots):
    nodes = [int(LAY.slot_node[s]) for s in slots]
    assert makespan(nodes, LAY.dist, LAY.depot, False) <= makespan(nodes, LAY.dist, LAY.depot, True)
