import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from picklab.instance import (SETTINGS, Bimodal, Explicit, Instance, InstanceError, Order, OrderStatistics,
                              Poisson, PolicyKind, Uniform, Weibull, aisle_of_slot, gen_pcart_oscillation,
                              gen_pcartn_unfortunate, gen_robot_oscillation, generate_adversarial,
                              generate_setting, illustrative_instance, instance_from_dict, predicted,
                              read_instance, sample_arrivals, write_instance)


def test_illustrative_arrivals_and_orders():
    # reference: r = (2, 2, 4, 10); o1={d2,j2}, o2={m2,t9}, o3={d9,g9}, o4={g2,m2}
    inst = illustrative_instance()
    assert inst.arrivals == (2, 2, 4, 10)
    names = {v: k for k, v in inst.layout.names.items()}
    assert [sorted(names[n] for n in inst.nodes(j)) for j in range(4)] == [
        ["d2", "j2"], ["m2", "t9"], ["d9", "g9"], ["g2", "m2"]]
    assert inst.capacity == 2 and inst.pick_time == 0


# -- JSON ----------------------------------------------------------------------

@pytest.mark.parametrize("make", [
    lambda: generate_setting("Base", 6, 3, "pcart"),
    lambda: generate_setting("Lesscrossaisles", 4, 1, "robot"),
    lambda: illustrative_instance("robot"),
    lambda: generate_adversarial("pcart-oscillation", k=5),
])
def test_json_round_trip(tmp_path, make):
    inst = make()
    path = tmp_path / "i.json"
    write_instance(inst, path)
    again = read_instance(path)
    assert again == inst
    assert np.array_equal(again.tdist, inst.tdist)


def test_json_schema_fields():
    d = generate_setting("Base", 3, 0, "pcart").to_dict()
    assert {"layout", "capacity", "pick_time_ticks", "orders", "arrivals_ticks", "provenance"} <= set(d)
    assert d["orders"][0].keys() == {"id", "slots"}


def _base_dict():
    return json.loads(json.dumps(generate_setting("Base", 3, 0, "pcart").to_dict()))


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d.pop("capacity"), "capacity"),
    (lambda d: d["arrivals_ticks"].reverse() or d["arrivals_ticks"].__setitem__(0, 10**9), "arrivals"),
    (lambda d: d["orders"][1]["slots"].append(99999), "orders[1].slots"),
    (lambda d: d["arrivals_ticks"].pop(), "arrivals_ticks"),
    (lambda d: d.__setitem__("capacity", 0), "capacity"),
    (lambda d: d["arrivals_ticks"].__setitem__(0, -1), "arrivals_ticks[0]"),
])
def test_invalid_json_names_the_field(mutate, path):
    d = _base_dict()
    mutate(d)
    with pytest.raises(InstanceError) as e:
        instance_from_dict(d)
    assert e.value.path.startswith(path)


def test_duplicate_slot_rejected():
    inst = illustrative_instance()
    with pytest.raises(InstanceError):
        Instance(inst.layout, (Order(0, (0, 0)),), (0,), 2)


def test_read_invalid_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(InstanceError):
        read_instance(p)


# -- arrival models ------------------------------------------------------------

def test_poisson_mean_gap():
    arr = sample_arrivals(Poisson(90), 5000, 1)
    gaps = np.diff((0,) + arr)
    assert abs(gaps.mean() - 57600 / 90) < 0.05 * 57600 / 90


@pytest.mark.parametrize("dist", [Uniform(1000), Weibull(1.5, 500), Bimodal(1000)])
def test_order_statistics_sorted_in_range(dist):
    arr = sample_arrivals(OrderStatistics(dist), 200, 5)
    assert list(arr) == sorted(arr) and arr[0] >= 0
    if isinstance(dist, Uniform):
        assert arr[-1] <= 1000


def test_explicit_validation():
    assert sample_arrivals(Explicit((1, 2, 2)), 3) == (1, 2, 2)
    with pytest.raises(ValueError):
        sample_arrivals(Explicit((3, 2)), 2)
    with pytest.raises(ValueError):
        sample_arrivals(Explicit((1,)), 2)


@given(st.integers(0, 10_000), st.integers(1, 30))
def test_sampling_is_deterministic(seed, n):
    assert sample_arrivals(Poisson(110), n, seed) == sample_arrivals(Poisson(110), n, seed)


# -- settings ------------------------------------------------------------------

def test_base_setting_shape():
    inst = generate_setting("Base", 10, 4, "pcart")
    assert inst.capacity == 2 and inst.travel == 5 and inst.pick_time == 40
    assert all(1 <= len(o.slots) <= 4 for o in inst.orders)
    assert inst.u == 859 * 5


def test_shared_components():
    base = generate_setting("Base", 8, 2, "pcart")
    for name in ("Smallbatches", "Largebatches", "Lesscrossaisles"):
        other = generate_setting(name, 8, 2, "pcart")
        assert other.orders == base.orders and other.arrivals == base.arrivals
    assert generate_setting("Smallbatches", 8, 2, "pcart").capacity == 1
    assert generate_setting("Largebatches", 8, 2, "pcart").capacity == 4
    rate = generate_setting("Smallrate", 8, 2, "pcart")
    assert rate.orders == base.orders and rate.arrivals != base.arrivals


def test_robot_reuses_pcart_orders():
    p = generate_setting("Base", 8, 2, "pcart")
    r = generate_setting("Base", 8, 2, "robot")
    assert p.orders == r.orders and p.arrivals != r.arrivals
    # same exponential variates at rate 110 instead of 90: gaps scale by 90/110
    assert abs(r.arrivals[-1] - p.arrivals[-1] * 90 / 110) <= 1


def test_fresh_components():
    base = generate_setting("Base", 8, 2, "pcart")
    large = generate_setting("Largeorders", 8, 2, "pcart")
    assert large.orders != base.orders
    assert all(1 <= len(o.slots) <= 8 for o in large.orders)
    assert all(len(o.slots) <= 2 for o in generate_setting("Smallorders", 20, 2, "pcart").orders)
    assert generate_setting("Largewarehouse", 4, 0, "pcart").layout.n_slots == 2400


def test_class_based_fractions():
    counts = np.zeros(3)
    for seed in range(40):
        inst = generate_setting("Classbaseddispersion", 20, seed, "pcart")
        for o in inst.orders:
            for s in o.slots:
                a = aisle_of_slot(s)
                counts[0 if a < 1 else 1 if a < 4 else 2] += 1
    frac = counts / counts.sum()
    # reference: classes A/B/C with 52%/36%/12%
    assert np.allclose(frac, [0.52, 0.36, 0.12], atol=0.04)


def test_all_settings_generate():
    for name in SETTINGS:
        for kind in PolicyKind:
            assert generate_setting(name, 3, 0, kind).n == 3


def test_unknown_setting():
    with pytest.raises(ValueError):
        generate_setting("Huge", 3, 0, "pcart")


# -- adversarial families ------------------------------------------------------

@pytest.mark.parametrize("k", [5, 7, 9, 11])
def test_pcart_oscillation_predictions(k):
    inst = gen_pcart_oscillation(k, 50, 50, 2 * k - 2)
    p = predicted(inst)
    s = inst.provenance["scale"]
    T = 2 * (50 + 50) * s
    assert p == {"reopt": k * T - (2 * k - 2) * s, "ciopt": k * T // 2 + T // 2}
    assert inst.n == 2 * k and inst.system is PolicyKind.PCART


def test_pcart_oscillation_spec_example():
    # k=5, W=L=5, delta=8: Reopt 92 and CIOPT 60 in theory units
    inst = gen_pcart_oscillation(5, 5, 5, 8)
    s = inst.provenance["scale"]
    assert predicted(inst) == {"reopt": 92 * s, "ciopt": 60 * s}


def test_robot_oscillation_predictions():
    inst = gen_robot_oscillation(3, 100, 1, 12)
    s = inst.provenance["scale"]
    assert predicted(inst) == {"reopt": (7 * 100 - 10 * 1 - 12) * s, "ciopt": (4 * 100 - 6) * s}
    assert inst.provenance["ciopt_form_valid"]
    assert not gen_robot_oscillation(2, 100, 1, 4).provenance["ciopt_form_valid"]


def test_pcartn_unfortunate_predictions():
    inst = gen_pcartn_unfortunate(10, 10, 1, 1)
    s = inst.provenance["scale"]
    assert predicted(inst) == {"reopt": 100 * s, "ciopt": 44 * s}


def test_unknown_family():
    with pytest.raises(ValueError):
        generate_adversarial("nope")
