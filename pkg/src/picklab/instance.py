"""Orders, instances, arrival models and instance generators."""
from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Sequence, Union

import numpy as np

from picklab.geometry import (Layout, LayoutError, WarehouseSpec, aisle_layout, build_layout,
                              grid_layout, layout_from_dict)


class InstanceError(ValueError):
    """Invalid instance data; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class PolicyKind(str, Enum):
    PCARTN = "pcart-n"
    PCART = "pcart"
    ROBOT = "robot"

    @property
    def pushcart(self) -> bool:
        return self is not PolicyKind.ROBOT

    @classmethod
    def parse(cls, value: "str | PolicyKind") -> "PolicyKind":
        if isinstance(value, PolicyKind):
            return value
        key = str(value).lower().replace("_", "-")
        aliases = {"pcartn": cls.PCARTN, "pcart-n": cls.PCARTN, "pcart": cls.PCART,
                   "robot": cls.ROBOT}
        if key not in aliases:
            raise ValueError(f"unknown picking system {value!r}")
        return aliases[key]


@dataclass(frozen=True)
class Order:
    id: int
    slots: tuple[int, ...]

    def __post_init__(self):
        if len(self.slots) == 0:
            raise InstanceError(f"orders[{self.id}].slots", "an order needs at least one item")


@dataclass(eq=False)
class Instance:
    layout: Layout
    orders: tuple[Order, ...]
    arrivals: tuple[int, ...]
    capacity: int
    pick_time: int = 0
    travel: int = 1                # time ticks per length tick
    system: PolicyKind | None = None
    provenance: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.orders = tuple(self.orders)
        self.arrivals = tuple(int(r) for r in self.arrivals)
        if len(self.orders) != len(self.arrivals):
            raise InstanceError("arrivals_ticks", "length differs from orders")
        if self.capacity < 1:
            raise InstanceError("capacity", "must be at least 1")
        if self.pick_time < 0:
            raise InstanceError("pick_time_ticks", "must be non-negative")
        if self.travel < 1:
            raise InstanceError("layout.travel_ticks_per_length_tick", "must be positive")
        for j, r in enumerate(self.arrivals):
            if r < 0:
                raise InstanceError(f"arrivals_ticks[{j}]", "negative time")
            if j and r < self.arrivals[j - 1]:
                raise InstanceError(f"arrivals[{j}]", "arrivals must be nondecreasing")
        for j, o in enumerate(self.orders):
            for i, s in enumerate(o.slots):
                if not 0 <= s < self.layout.n_slots:
                    raise InstanceError(f"orders[{j}].slots[{i}]", f"slot {s} out of range")
            if len(set(o.slots)) != len(o.slots):
                raise InstanceError(f"orders[{j}].slots", "duplicate slot")

    @property
    def n(self) -> int:
        return len(self.orders)

    @cached_property
    def tdist(self) -> np.ndarray:
        """All-pairs travel times in time ticks."""
        d = self.layout.dist * self.travel
        d.setflags(write=False)
        return d

    def nodes(self, j: int) -> list[int]:
        return [int(self.layout.slot_node[s]) for s in self.orders[j].slots]

    @property
    def u(self) -> int:
        """Traversal bound in time ticks."""
        return self.layout.traversal_bound() * self.travel

    def with_arrivals(self, arrivals: Sequence[int]) -> "Instance":
        return replace(self, arrivals=tuple(arrivals))

    def released(self) -> "Instance":
        """The same instance with every arrival at time 0."""
        return self.with_arrivals([0] * self.n)

    def without_pick_time(self) -> "Instance":
        return replace(self, pick_time=0)

    def subset(self, ids: Sequence[int]) -> "Instance":
        ids = sorted(ids)
        return replace(self, orders=tuple(self.orders[i] for i in ids),
                       arrivals=tuple(self.arrivals[i] for i in ids))

    def to_dict(self) -> dict[str, Any]:
        lay = dict(self.layout.to_dict())
        lay["travel_ticks_per_length_tick"] = self.travel
        return {
            "layout": lay,
            "capacity": self.capacity,
            "pick_time_ticks": self.pick_time,
            "system": self.system.value if self.system else None,
            "orders": [{"id": o.id, "slots": list(o.slots)} for o in self.orders],
            "arrivals_ticks": list(self.arrivals),
            "provenance": self.provenance,
        }

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Instance) and self.to_dict() == other.to_dict()

    __hash__ = None  # type: ignore[assignment]


# -- serialization --------------------------------------------------------------

def _need(d: dict, key: str, path: str):
    if not isinstance(d, dict) or key not in d:
        raise InstanceError(f"{path}{key}" if path else key, "missing field")
    return d[key]


def _int(v: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise InstanceError(path, "expected an integer")
    if minimum is not None and v < minimum:
        raise InstanceError(path, f"must be >= {minimum}")
    return v


def instance_from_dict(d: dict[str, Any]) -> Instance:
    lay = dict(_need(d, "layout", ""))
    travel = _int(lay.pop("travel_ticks_per_length_tick", 1), "layout.travel_ticks_per_length_tick", 1)
    try:
        layout = layout_from_dict(lay)
    except (LayoutError, KeyError, TypeError) as exc:
        raise InstanceError("layout", str(exc)) from exc
    cap = _int(_need(d, "capacity", ""), "capacity", 1)
    pick = _int(_need(d, "pick_time_ticks", ""), "pick_time_ticks", 0)
    raw_orders = _need(d, "orders", "")
    if not isinstance(raw_orders, list):
        raise InstanceError("orders", "expected a list")
    orders = []
    for j, o in enumerate(raw_orders):
        slots = _need(o, "slots", f"orders[{j}].")
        if not isinstance(slots, list) or not slots:
            raise InstanceError(f"orders[{j}].slots", "an order needs at least one item")
        orders.append(Order(_int(_need(o, "id", f"orders[{j}]."), f"orders[{j}].id"),
                            tuple(_int(s, f"orders[{j}].slots[{i}]", 0) for i, s in enumerate(slots))))
    arr = _need(d, "arrivals_ticks", "")
    if not isinstance(arr, list):
        raise InstanceError("arrivals_ticks", "expected a list")
    arrivals = [_int(r, f"arrivals_ticks[{j}]", 0) for j, r in enumerate(arr)]
    for j in range(1, len(arrivals)):
        if arrivals[j] < arrivals[j - 1]:
            raise InstanceError(f"arrivals[{j}]", "arrivals must be nondecreasing")
    system = d.get("system")
    return Instance(layout, tuple(orders), tuple(arrivals), cap, pick, travel,
                    PolicyKind.parse(system) if system else None, dict(d.get("provenance") or {}))


def write_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance.to_dict(), indent=1) + "\n", encoding="utf-8")


def read_instance(path: str | Path) -> Instance:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceError("<root>", f"invalid JSON: {exc}") from exc
    return instance_from_dict(data)


# -- arrival models -------------------------------------------------------------

@dataclass(frozen=True)
class Uniform:
    t: float

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.t <= 0:
            raise ValueError("uniform horizon must be positive")
        return rng.uniform(0.0, self.t, n)


@dataclass(frozen=True)
class Weibull:
    shape: float
    scale: float

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError("Weibull parameters must be positive")
        return self.scale * rng.weibull(self.shape, n)


@dataclass(frozen=True)
class Bimodal:
    """Two-component normal mixture truncated at 0; means and SDs are fractions of ``t``."""

    t: float
    means: tuple[float, float] = (0.35, 0.8)
    sds: tuple[float, float] = (0.08, 0.08)
    weights: tuple[float, float] = (0.5, 0.5)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.t <= 0 or min(self.sds) <= 0 or min(self.weights) < 0 or sum(self.weights) <= 0:
            raise ValueError("invalid bimodal parameters")
        w = np.asarray(self.weights, dtype=float)
        out = np.empty(n)
        for i in range(n):
            comp = rng.choice(2, p=w / w.sum())
            while True:
                x = rng.normal(self.means[comp] * self.t, self.sds[comp] * self.t)
                if x >= 0:
                    break
            out[i] = x
        return out


@dataclass(frozen=True)
class OrderStatistics:
    dist: Union[Uniform, Weibull, Bimodal]


@dataclass(frozen=True)
class Poisson:
    rate: float                  # orders per shift
    shift: int = 57600           # 4 h at 4 ticks per second


@dataclass(frozen=True)
class Explicit:
    times: tuple[int, ...]


ArrivalModel = Union[OrderStatistics, Poisson, Explicit]


def _rng(seed: int | np.random.Generator, *key: Any) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    words = [int(seed)]
    for k in key:
        words.append(zlib.crc32(str(k).encode()) if not isinstance(k, int) else int(k))
    return np.random.default_rng(words)


def sample_arrivals(model: ArrivalModel, n: int, seed: int | np.random.Generator = 0) -> tuple[int, ...]:
    """Nondecreasing integer arrival ticks."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if isinstance(model, Explicit):
        times = tuple(int(t) for t in model.times)
        if len(times) != n:
            raise ValueError("explicit times length differs from n")
        if any(t < 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("explicit times must be non-negative and nondecreasing")
        return times
    rng = _rng(seed, "arrivals")
    if isinstance(model, OrderStatistics):
        draws = np.sort(model.dist.draw(rng, n))
    elif isinstance(model, Poisson):
        if model.rate <= 0 or model.shift <= 0:
            raise ValueError("Poisson rate and shift must be positive")
        draws = np.cumsum(rng.exponential(model.shift / model.rate, n))
    else:
        raise TypeError(f"unknown arrival model {model!r}")
    return tuple(int(x) for x in np.rint(draws))


# -- named settings -------------------------------------------------------------

BASE_TICKS_PER_SECOND = 4
BASE_TRAVEL = 5        # 1 m at 0.8 m/s is 1.25 s
BASE_PICK = 40         # 10 s


@dataclass(frozen=True)
class Setting:
    name: str
    aisles: int = 10
    cross_aisles: int = 3
    kbar: int = 4
    capacity: int = 2
    rates: tuple[int, int] = (90, 110)     # (Pcart, Robot) orders per shift
    class_based: bool = False
    # which components are drawn anew rather than taken from Base
    fresh: tuple[str, ...] = ()


SETTINGS: dict[str, Setting] = {s.name: s for s in [
    Setting("Base"),
    Setting("Largewarehouse", aisles=20, fresh=("slots",)),
    Setting("Lesscrossaisles", cross_aisles=2),
    Setting("Classbaseddispersion", class_based=True, fresh=("slots",)),
    Setting("Smallorders", kbar=2, fresh=("sizes", "slots", "arrivals")),
    Setting("Largeorders", kbar=8, fresh=("sizes", "slots", "arrivals")),
    Setting("Smallbatches", capacity=1),
    Setting("Largebatches", capacity=4),
    Setting("Smallrate", rates=(70, 90), fresh=("arrivals",)),
    Setting("Largerate", rates=(110, 130), fresh=("arrivals",)),
]}

CLASS_PROBS = (0.52, 0.36, 0.12)
CLASS_AISLES = ((0, 1), (1, 4), (4, 10))   # half-open aisle index ranges


def _slots_per_aisle(spec: WarehouseSpec) -> int:
    return 2 * spec.shelves_per_aisle * spec.slots_per_shelf


def _draw_order_slots(rng: np.random.Generator, size: int, pool: int) -> tuple[int, ...]:
    return tuple(int(s) for s in rng.choice(pool, size=size, replace=False))


def generate_setting(name: str, n: int, seed: int, system: "PolicyKind | str") -> Instance:
    """One instance of a named setting.

    Components (order sizes, item slots, arrival times) are drawn from
    independent streams keyed by ``(seed, n, component, tag)``. A setting
    reuses Base's stream for every component it does not list in ``fresh``,
    so one-factor-at-a-time comparisons share everything else. Pcart and
    Robot share orders; their arrivals use the same exponential variates at
    different rates.
    """
    if name not in SETTINGS:
        raise ValueError(f"unknown setting {name!r}; expected one of {sorted(SETTINGS)}")
    if n < 1:
        raise ValueError("n must be at least 1")
    st = SETTINGS[name]
    kind = PolicyKind.parse(system)
    spec = WarehouseSpec(aisles=st.aisles, cross_aisles=st.cross_aisles)
    layout = _cached_layout(spec)

    def tag(component: str) -> str:
        return name if component in st.fresh else "Base"

    size_rng = _rng(seed, n, "sizes", tag("sizes"))
    sizes = size_rng.integers(1, st.kbar + 1, size=n)

    slot_rng = _rng(seed, n, "slots", tag("slots"))
    per_aisle = _slots_per_aisle(spec)
    orders = []
    for j, k in enumerate(sizes):
        if st.class_based:
            chosen: list[int] = []
            while len(chosen) < k:
                cls = slot_rng.choice(3, p=CLASS_PROBS)
                lo, hi = CLASS_AISLES[cls]
                s = int(slot_rng.integers(lo * per_aisle, hi * per_aisle))
                if s not in chosen:
                    chosen.append(s)
            orders.append(Order(j, tuple(chosen)))
        else:
            orders.append(Order(j, _draw_order_slots(slot_rng, int(k), layout.n_slots)))

    rate = st.rates[1] if kind is PolicyKind.ROBOT else st.rates[0]
    arr_rng = _rng(seed, n, "arrivals", tag("arrivals"))
    arrivals = sample_arrivals(Poisson(rate), n, arr_rng)

    return Instance(
        layout=layout, orders=tuple(orders), arrivals=arrivals, capacity=st.capacity,
        pick_time=BASE_PICK, travel=BASE_TRAVEL, system=kind,
        provenance={"generator": "setting", "setting": name, "n": n, "seed": seed,
                    "system": kind.value, "rate_per_shift": rate},
    )


_LAYOUTS: dict[WarehouseSpec, Layout] = {}


def _cached_layout(spec: WarehouseSpec) -> Layout:
    if spec not in _LAYOUTS:
        _LAYOUTS[spec] = build_layout(spec)
    return _LAYOUTS[spec]


def aisle_of_slot(slot: int, spec: WarehouseSpec | None = None) -> int:
    return slot // _slots_per_aisle(spec or WarehouseSpec())


# -- adversarial families -------------------------------------------------------

def _scale_for(checks, limit: int = 10_000) -> int:
    for s in range(1, limit):
        if all(chk(s) for chk in checks):
            return s
    raise ValueError("parameters are not representable at any integer scale")


def _is_int(x: Fraction) -> bool:
    return Fraction(x).denominator == 1


def _theory(layout: Layout, slots_per_order: list[tuple[int, ...]], arrivals: list[Fraction],
            capacity: int, system: PolicyKind, prov: dict[str, Any]) -> Instance:
    return Instance(layout, tuple(Order(j, s) for j, s in enumerate(slots_per_order)),
                    tuple(int(a) for a in arrivals), capacity, 0, 1, system, prov)


def gen_pcart_oscillation(k: int, W, L, delta, scale: int | None = None) -> Instance:
    """Single-item orders alternating between two antipodal points of a cycle.

    Two aisles of height ``W`` are ``L`` apart; the depot sits in the middle
    of the bottom cross-aisle, ``s_left``/``s_right`` at mid-height. The first
    order also holds ``s'``, one tick above ``s_left``, to break the initial
    tie in favour of a joint batch.
    """
    if k < 5 or k % 2 == 0:
        raise ValueError("k must be odd and at least 5")
    W, L, delta = Fraction(W), Fraction(L), Fraction(delta)
    if min(W, L, delta) <= 0:
        raise ValueError("W, L and delta must be positive")
    dp = delta / (2 * k - 2)
    if scale is None:
        scale = _scale_for([lambda s: _is_int(W * s / 2), lambda s: _is_int(L * s / 2),
                            lambda s: _is_int(dp * s) and dp * s >= 2])
    w, l, d1 = W * scale, L * scale, dp * scale
    if not (_is_int(w / 2) and _is_int(l / 2) and _is_int(d1) and d1 >= 2):
        raise ValueError("delta/(2k-2) must be an integer of at least 2 ticks at this scale")
    T = 2 * w + 2 * l
    if d1 >= T / 8:
        raise ValueError("delta too large for the cycle")
    mid = int(w / 2)
    layout = aisle_layout([0, int(l)], [0, int(w)], [(0, mid), (1, mid), (0, mid + 1)],
                          (int(l / 2), 0))
    slots, arrivals = [], []
    for p in range(1, k + 1):
        r = Fraction(2 * p - 1, 4) * T - (2 * p - 3) * d1 if p > 1 else Fraction(0)
        slots += [(0,), (1,)]
        arrivals += [r, r]
    slots[0] = (0, 2)
    reopt = k * T - delta * scale
    ciopt = Fraction(k, 2) * T + T / 2
    prov = {"generator": "pcart-oscillation", "params": {"k": k, "W": str(W), "L": str(L),
            "delta": str(delta)}, "scale": scale,
            "predicted": {"reopt": int(reopt), "ciopt": int(ciopt)}}
    return _theory(layout, slots, arrivals, 2, PolicyKind.PCART, prov)


def gen_robot_oscillation(k: int, W, eps, delta, scale: int | None = None) -> Instance:
    """Two-item orders {s_bottom, s_top} on a single aisle, robot system."""
    if k < 2:
        raise ValueError("k must be at least 2")
    W, eps, delta = Fraction(W), Fraction(eps), Fraction(delta)
    if min(W, eps, delta) <= 0:
        raise ValueError("W, eps and delta must be positive")
    dp = delta / (4 * k)

    def times(s: int) -> list[Fraction]:
        w, e, d1 = W * s, eps * s, dp * s
        out = [2 * e]
        for p in range(1, k + 1):
            out.append(Fraction(2 * p - 1, 2) * w - (2 * p - 5) * e - (4 * p - 3) * d1)
            out.append(p * w - (2 * p - 4) * e - (4 * p - 1) * d1)
        return out

    if scale is None:
        scale = _scale_for([lambda s: _is_int(W * s), lambda s: _is_int(eps * s),
                            lambda s: _is_int(dp * s), lambda s: all(map(_is_int, times(s)))])
    arr = times(scale)
    w, e = W * scale, eps * scale
    if not (_is_int(w) and _is_int(e) and all(map(_is_int, arr))):
        raise ValueError("parameters are not representable at this scale")
    if any(t <= 0 for t in arr) or any(b < a for a, b in zip(arr, arr[1:])):
        raise ValueError("arrival schedule must be positive and nondecreasing")
    if not 2 * e < w:
        raise ValueError("eps too large for the aisle")
    layout = aisle_layout([0], [0, int(w) + 1], [(0, int(2 * e)), (0, int(w))], (0, 0))
    reopt = ((2 * k + 1) * W - (4 * k - 2) * eps - delta) * scale
    ciopt = ((k + 1) * W - 2 * k * eps) * scale
    prov = {"generator": "robot-oscillation", "params": {"k": k, "W": str(W), "eps": str(eps),
            "delta": str(delta)}, "scale": scale,
            "predicted": {"reopt": int(reopt), "ciopt": int(ciopt)},
            # the optimum equals the closed form only while 2 eps <= 3 delta/(4k)
            "ciopt_form_valid": bool(2 * eps <= 3 * dp)}
    return _theory(layout, [(0, 1)] * (2 * k + 1), arr, 2, PolicyKind.ROBOT, prov)


def gen_pcartn_unfortunate(W, L, eps, delta, scale: int | None = None) -> Instance:
    """A close single-item order batched with a far two-item order just before its twin arrives."""
    W, L, eps, delta = map(Fraction, (W, L, eps, delta))
    if min(W, L, eps, delta) <= 0:
        raise ValueError("W, L, eps and delta must be positive")
    if scale is None:
        scale = _scale_for([lambda s: all(_is_int(x * s) for x in (W, L, eps, delta))])
    w, l, e, d = (int(x * scale) for x in (W, L, eps, delta))
    if not 2 * e < w:
        raise ValueError("eps too large for the aisle")
    # slots: 0 close, 1 right-far, 2 left-far
    layout = aisle_layout([0, l], [0, w], [(0, e), (1, w - e), (0, w - e)], (0, 0))
    slots = [(0,), (1, 2), (1, 2)]
    arrivals = [w + l, w + l, w + l + d]
    prov = {"generator": "pcartn-unfortunate", "params": {"W": str(W), "L": str(L),
            "eps": str(eps), "delta": str(delta)}, "scale": scale,
            "predicted": {"reopt": 5 * (w + l), "ciopt": 2 * (w + l) + 3 * e + d}}
    return _theory(layout, slots, arrivals, 2, PolicyKind.PCARTN, prov)


def gen_early_dispatch(t_dispatch: int, W: int) -> Instance:
    """The instance revealed to a policy that dispatches ``{o1}`` at ``t_dispatch``."""
    t, W = int(t_dispatch), int(W)
    if W <= 0 or W % 2 or t < 0:
        raise ValueError("W must be a positive even tick count and t non-negative")
    half = W // 2
    if t >= W:
        layout = aisle_layout([0], [0, W], [(0, half)], (0, 0))
        slots, arr, case, ciopt, alg = [(0,)], [0], 1, W, t + W
    elif t >= half:
        access = [(0, half)] + ([(0, t)] if t != half else [(0, half)])
        layout = aisle_layout([0], [0, W], access, (0, 0))
        slots, arr, case, ciopt, alg = [(0,), (1,)], [0, t], 2, 2 * t, t + W + 2 * t
    else:
        layout = aisle_layout([0], [0, W], [(0, half), (0, half)], (0, 0))
        slots, arr, case, ciopt, alg = [(0,), (1,)], [0, t], 3, W, t + W + W
    prov = {"generator": "early-dispatch", "params": {"t_dispatch": t, "W": W}, "case": case,
            "predicted": {"ciopt": ciopt, "alg": alg}}
    return _theory(layout, slots, arr, 2, PolicyKind.PCARTN, prov)


# -- illustrative fixture -------------------------------------------------------

def _col(c: str) -> int:
    return ord(c) - ord("a")


ILLUSTRATIVE_CELLS: dict[str, tuple[int, int]] = {
    "a1": (0, 1), "c1": (2, 1), "d1": (3, 1), "d2": (3, 2), "d6": (3, 6), "d9": (3, 9),
    "g1": (6, 1), "g2": (6, 2), "g9": (6, 9), "j2": (9, 2), "m2": (12, 2),
    # the far item sits at the east end of the lower-right corridor
    "t9": (18, 9),
}


def _illustrative_free() -> list[tuple[int, int]]:
    free: set[tuple[int, int]] = set()
    free.update((c, 1) for c in range(0, 13))                  # bottom corridor a..m
    free.update((_col("d"), r) for r in range(1, 11))          # column d
    free.update((_col("g"), r) for r in range(1, 11))          # column g
    free.update((c, 10) for c in range(_col("d"), 19))         # top corridor d..s
    free.update((c, 3) for c in range(_col("g"), 19))          # middle corridor g..s
    free.update((_col("j"), r) for r in range(1, 4))
    free.update((_col("m"), r) for r in range(1, 4))
    free.update((18, r) for r in range(3, 11))                 # east column
    return sorted(free)


ILLUSTRATIVE_ORDERS = (("d2", "j2"), ("m2", "t9"), ("d9", "g9"), ("g2", "m2"))
ILLUSTRATIVE_ARRIVALS = (2, 2, 4, 10)


def illustrative_instance(system: "PolicyKind | str | None" = None) -> Instance:
    """Four orders on a small grid; depot at ``a1``, c = 2, unit speed, zero pick time."""
    slot_names = sorted({s for o in ILLUSTRATIVE_ORDERS for s in o})
    layout = grid_layout(_illustrative_free(), ILLUSTRATIVE_CELLS, slot_names, "a1")
    idx = {s: i for i, s in enumerate(slot_names)}
    orders = tuple(Order(j, tuple(idx[s] for s in o)) for j, o in enumerate(ILLUSTRATIVE_ORDERS))
    return Instance(layout, orders, ILLUSTRATIVE_ARRIVALS, 2, 0, 1,
                    PolicyKind.parse(system) if system else None,
                    {"generator": "illustrative"})


ADVERSARIAL_FAMILIES = ("pcart-oscillation", "robot-oscillation", "pcartn-unfortunate", "early-dispatch")


def generate_adversarial(family: str, **params: Any) -> Instance:
    if family == "pcart-oscillation":
        return gen_pcart_oscillation(params["k"], params.get("W", 50), params.get("L", 50),
                                     params.get("delta", 2 * params["k"] - 2), params.get("scale"))
    if family == "robot-oscillation":
        k = params["k"]
        return gen_robot_oscillation(k, params.get("W", 100), params.get("eps", 1),
                                     params.get("delta", 4 * k), params.get("scale"))
    if family == "pcartn-unfortunate":
        return gen_pcartn_unfortunate(params.get("W", 10), params.get("L", 10),
                                      params.get("eps", 1), params.get("delta", 1),
                                      params.get("scale"))
    if family == "early-dispatch":
        return gen_early_dispatch(params["t"], params.get("W", 100))
    raise ValueError(f"unknown family {family!r}; expected one of {ADVERSARIAL_FAMILIES}")


def predicted(instance: Instance) -> dict[str, int]:
    return dict(instance.provenance.get("predicted", {}))


def total_items(instance: Instance) -> int:
    return sum(len(o.slots) for o in instance.orders)


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


__all__ = [
    "ArrivalModel", "Bimodal", "Explicit", "Instance", "InstanceError", "Order", "OrderStatistics",
    "PolicyKind", "Poisson", "SETTINGS", "Uniform", "Weibull", "gen_early_dispatch",
    "gen_pcart_oscillation", "gen_pcartn_unfortunate", "gen_robot_oscillation",
    "generate_adversarial", "generate_setting", "illustrative_instance", "read_instance",
    "sample_arrivals", "write_instance",
]
