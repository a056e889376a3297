import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from picklab.ciopt import SolverBudget, brute_force_ciopt, lower_bounds, solve_ciopt
from picklab.instance import (Order, PolicyKind, generate_setting, illustrative_instance,
                              total_items)
from picklab.routing import Unsolved

SETTING_NAMES = ["Base", "Smallbatches", "Largebatches", "Classbaseddispersion", "Smallorders",
                 "Lesscrossaisles"]


def small_instances(count, seed=0, max_n=5, max_items=9):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        name = SETTING_NAMES[int(rng.integers(len(SETTING_NAMES)))]
        kind = list(PolicyKind)[int(rng.integers(3))]
        inst = generate_setting(name, int(rng.integers(1, max_n + 1)), int(rng.integers(10_000)), kind)
        if total_items(inst) <= max_items:
            out.append((inst, kind))
    return out


def test_illustrative_pushcart():
    # reference: CIOPT = 88 with batches ({o1,o3},{o2,o4})
    sol = solve_ciopt(illustrative_instance(), "pcart")
    assert sol.objective == 88
    assert sol.batches == [(0, 2), (1, 3)]


def test_illustrative_pushcart_route():
    # reference: route a1,d2,d9,g9,j2,a1,g2,t9,m2,m2,a1
    inst = illustrative_instance()
    sol = solve_ciopt(inst, "pcart")
    names = {v: k for k, v in inst.layout.names.items()}
    first, second = ([names[v.item.node] for v in r.visits] for r in sol.routes)
    assert first == ["d2", "d9", "g9", "j2"]
    assert sol.routes[0].finish == 36
    # the second tour is quoted as g2,t9,m2,m2; its reverse is equally long and
    # the lexicographic tie rule picks that one
    assert sorted(first + second) == sorted(["d2", "d9", "g9", "j2", "g2", "t9", "m2", "m2"])
    assert second in (["g2", "t9", "m2", "m2"], ["m2", "m2", "t9", "g2"])
    assert sol.routes[1].finish - sol.routes[0].finish == 52


def test_illustrative_robot():
    # reference: CIOPT = 52 with batches ({o1,o4},{o2,o3})
    sol = solve_ciopt(illustrative_instance(), "robot")
    assert sol.objective == 52
    assert sol.batches == [(0, 3), (1, 2)]


def test_pcartn_shares_pushcart_optimum():
    inst = illustrative_instance()
    assert solve_ciopt(inst, "pcart-n").objective == solve_ciopt(inst, "pcart").objective


def test_matches_brute_force_sample():
    for inst, kind in small_instances(60, seed=3):
        assert solve_ciopt(inst, kind).objective == brute_force_ciopt(inst, kind)


def test_symmetry_reduction_is_exact():
    # many orders sharing one location exercise the release-order restriction
    base = generate_setting("Base", 5, 1, "pcart")
    orders = [Order(j, base.orders[0].slots[:2] if j % 2 else base.orders[1].slots[:1]) for j in range(5)]
    for kind in PolicyKind:
        inst = base.__class__(base.layout, orders, base.arrivals, 2, base.pick_time, base.travel, kind)
        assert solve_ciopt(inst, kind).objective == brute_force_ciopt(inst, kind)


@pytest.mark.parametrize("inst,kind", small_instances(200, seed=9, max_n=7, max_items=18))
def test_lower_bounds_hold(inst, kind):
    lb = lower_bounds(inst, kind)
    opt = solve_ciopt(inst, kind).objective
    assert lb["lb_release"] <= opt
    assert lb["lb_makespan"] <= solve_ciopt(inst.released(), kind).objective <= opt


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.sampled_from(list(PolicyKind)))
def test_subset_monotone(seed, kind):
    inst = generate_setting("Base", 5, seed, kind)
    full = solve_ciopt(inst, kind).objective
    assert solve_ciopt(inst.subset(range(4)), kind).objective <= full


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.sampled_from(list(PolicyKind)))
def test_release_relaxation(seed, kind):
    inst = generate_setting("Smallbatches", 4, seed, kind)
    assert solve_ciopt(inst.released(), kind).objective <= solve_ciopt(inst, kind).objective


@settings(max_examples=20)
@given(st.integers(0, 10_000), st.sampled_from(list(PolicyKind)))
def test_relabeling_invariance(seed, kind):
    inst = generate_setting("Base", 5, seed, kind).released()
    perm = np.random.default_rng(seed).permutation(inst.n)
    shuffled = inst.__class__(inst.layout, [inst.orders[i] for i in perm], inst.arrivals, inst.capacity,
                              inst.pick_time, inst.travel, kind)
    assert solve_ciopt(shuffled, kind).objective == solve_ciopt(inst, kind).objective


def test_solution_replays():
    inst = generate_setting("Base", 6, 5, "robot")
    sol = solve_ciopt(inst, "robot")
    items = sorted((v.item.order, v.item.node) for r in sol.routes for v in r.visits)
    assert items == sorted((j, n) for j in range(inst.n) for n in inst.nodes(j))
    for r in sol.routes:
        for v in r.visits:
            assert v.completion - inst.pick_time >= inst.arrivals[v.item.order]
    assert sol.routes[-1].finish == sol.objective
    assert sum(len(b) for b in sol.batches) == inst.n and all(len(b) <= 2 for b in sol.batches)


def test_time_budget():
    inst = generate_setting("Largebatches", 12, 0, "pcart")
    with pytest.raises(Unsolved) as e:
        solve_ciopt(inst, "pcart", SolverBudget(time_limit=0.01))
    assert e.value.reason == "time"


def test_batch_too_large():
    inst = generate_setting("Largeorders", 6, 0, "pcart")
    with pytest.raises(Unsolved) as e:
        solve_ciopt(inst, "pcart", SolverBudget(item_limit=3))
    assert e.value.reason == "batch-too-large"


def test_memory_budget():
    inst = generate_setting("Base", 9, 0, "pcart")
    with pytest.raises(Unsolved) as e:
        solve_ciopt(inst, "pcart", SolverBudget(memory_limit=1000))
    assert e.value.reason == "memory"


def test_solution_json():
    d = solve_ciopt(illustrative_instance(), "pcart").to_json()
    assert d["objective_ticks"] == 88 and d["batches"] == [[0, 2], [1, 3]]
