import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from picklab.ciopt import SolverBudget, solve_ciopt
from picklab.instance import (Instance, Order, PolicyKind, generate_setting, illustrative_instance)
from picklab.reopt import position_at, queue_probe, replan, simulate
from picklab.routing import Item, Position, RoutingTask, Unsolved, route_value

ILL = illustrative_instance()
NAME = {v: k for k, v in ILL.layout.names.items()}


def replan_cells(res):
    return [(e["t"], NAME[e["position"]["node"]]) for e in res.trace.replans()]


def completed_batches(res):
    return [tuple(e["orders"]) for e in res.trace.events if e["event"] == "batch-complete"]


def test_pcartn_illustrative():
    # reference: 100 with batches ({o1,o2},{o3,o4})
    res = simulate(ILL, "pcart-n")
    assert res.objective == 100
    assert completed_batches(res) == [(0, 1), (2, 3)]


def test_pcart_illustrative():
    # reference: 90 with batches ({o1,o4},{o2,o3}); replans at a1, c1, g1
    res = simulate(ILL, "pcart")
    assert res.objective == 90
    assert completed_batches(res) == [(0, 3), (1, 2)]
    assert replan_cells(res) == [(2, "a1"), (4, "c1"), (10, "g1")]


def test_robot_illustrative():
    # reference: 54 with batches ({o1,o3},{o2,o4}); replans at a1, c1, d6
    res = simulate(ILL, "robot")
    assert res.objective == 54
    assert completed_batches(res) == [(0, 2), (1, 3)]
    assert replan_cells(res) == [(2, "a1"), (4, "c1"), (10, "d6")]


@pytest.mark.parametrize("kind", list(PolicyKind))
def test_all_released_equals_ciopt(kind):
    inst = generate_setting("Base", 6, 3, kind).released()
    assert simulate(inst, kind).objective == solve_ciopt(inst, kind).objective


@pytest.mark.parametrize("kind", list(PolicyKind))
def test_single_order(kind):
    # nothing is known before r_1, so Reopt starts then on the best single route
    inst = generate_setting("Base", 1, 8, kind)
    kind = PolicyKind.parse(kind)
    items = [Item(i, nd) for i, nd in enumerate(inst.nodes(0))]
    end = inst.layout.depot if kind.pushcart else None
    m = route_value(RoutingTask(inst.tdist, items, Position.at(inst.layout.depot), 0, end, inst.pick_time))
    assert simulate(inst, kind).objective == inst.arrivals[0] + m
    assert simulate(inst.released(), kind).objective == solve_ciopt(inst.released(), kind).objective == m


@settings(max_examples=30)
@given(st.integers(0, 10_000), st.sampled_from(list(PolicyKind)), st.integers(2, 6))
def test_trace_consistency(seed, kind, n):
    inst = generate_setting("Base", n, seed, kind)
    res = simulate(inst, kind)
    assert res.objective >= solve_ciopt(inst, kind).objective
    ev = res.trace.events
    assert [e["t"] for e in ev] == sorted(e["t"] for e in ev)
    picks = [e for e in ev if e["event"] == "pick"]
    assert sorted((e["order"], e["node"]) for e in picks) == sorted(
        (j, nd) for j in range(n) for nd in inst.nodes(j))
    for e in picks:
        assert e["t"] >= inst.arrivals[e["order"]]
        assert e["completion"] == e["t"] + inst.pick_time
    done = [j for b in completed_batches(res) for j in b]
    assert sorted(done) == list(range(n))
    assert all(len(b) <= inst.capacity for b in completed_batches(res))
    assert len(res.trace.queue) == n


def test_commenced_orders_finish_in_current_batch():
    # every order's items are picked within one batch
    for seed in range(5):
        inst = generate_setting("Base", 6, seed, "pcart")
        res = simulate(inst, "pcart")
        done_at = {}
        for e in res.trace.events:
            if e["event"] == "batch-complete":
                for j in e["orders"]:
                    done_at[j] = e["t"]
        batches = completed_batches(res)
        for b in batches:
            t_end = done_at[b[0]]
            prev = max([done_at[c[0]] for c in batches if done_at[c[0]] < t_end], default=-1)
            for e in res.trace.events:
                if e["event"] == "pick" and e["order"] in b:
                    assert prev <= e["t"] <= t_end


def test_replan_from_edge_position():
    inst = illustrative_instance("pcart")
    u = inst.layout.node("c1")
    v = inst.layout.node("d1")
    sol = replan(inst, "pcart", Position(u, v, 0, 1), 4, {}, [0, 1])
    direct = replan(inst, "pcart", Position.at(u), 4, {}, [0, 1])
    assert sol.objective == direct.objective


def test_replan_with_commenced_order():
    inst = illustrative_instance("pcart")
    # o1 started (d2 picked); only j2 is left and must be in the first batch
    j2 = inst.orders[0].slots[1]
    sol = replan(inst, "pcart", Position.at(inst.layout.node("g1")), 10, {0: [j2]}, [1, 2, 3])
    assert sol.objective == 90
    assert 0 in sol.batches[0]


def test_position_at_walks_the_plan():
    inst = illustrative_instance("pcart")
    sol = solve_ciopt(inst, "pcart")
    snap = position_at(inst, sol.routes, 0, True)
    assert snap.position == Position.at(inst.layout.depot)
    end = position_at(inst, sol.routes, 10**6, True)
    assert end.finished and end.position == Position.at(inst.layout.depot)


def test_budget_propagates():
    inst = generate_setting("Largebatches", 10, 0, "pcart").released()
    with pytest.raises(Unsolved):
        simulate(inst, "pcart", SolverBudget(time_limit=0.001))


def test_queue_probe():
    inst = generate_setting("Base", 6, 0, "robot")
    series, complete = queue_probe(inst, "robot")
    assert complete and len(series) == 6
    assert all(0 < q <= 1 for q in series)


def test_robot_fully_picked_order_in_cart():
    # regression: a commenced robot order whose items are all picked while the
    # batch is still running must not break the replan
    inst = generate_setting("Base", 8, 0, "robot")
    assert simulate(inst, "robot").objective >= solve_ciopt(inst, "robot").objective
