"""Exact batching, sequencing and routing with release times.

The outer dynamic program runs over sets of completed orders. For pushcarts a
state holds one number, the earliest time back at the depot. For the robot a
state holds, for every item node where the last batch may have ended, the
earliest time of that final pick. Transitions add one batch of at most ``c``
orders and price it with the Held-Karp kernel.

The same engine solves the constrained replanning problems of the Reopt
policies: a mandatory first batch that starts at an arbitrary position and
carries the remaining items of commenced orders.

Orders with identical item locations are interchangeable; an exchange
argument shows some optimal plan serves them in release order, so states are
restricted to sets that contain a release-ordered prefix of every such class.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterator, Sequence

import numpy as np

from picklab.instance import Instance, PolicyKind
from picklab.kernels import INF, backtrack, hk_table
from picklab.routing import (DEFAULT_ITEM_LIMIT, Item, Position, RoutingTask, TimedRoute,
                             Unsolved, makespan, route_batch, route_value)


@dataclass(frozen=True)
class SolverBudget:
    time_limit: float = 300.0            # seconds
    memory_limit: int = 8 << 30          # bytes
    item_limit: int = DEFAULT_ITEM_LIMIT

    def __post_init__(self):
        if self.time_limit <= 0 or self.memory_limit <= 0 or self.item_limit <= 0:
            raise ValueError("budget limits must be positive")


@dataclass(frozen=True)
class PlanOrder:
    id: int
    items: tuple[Item, ...]
    release: int = 0
    forced: bool = False


@dataclass
class Solution:
    objective: int
    batches: list[tuple[int, ...]]
    routes: list[TimedRoute] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "objective_ticks": self.objective,
            "batches": [list(b) for b in self.batches],
            "routes": [
                {
                    "start": r.start.to_json(),
                    "start_time": r.start_time,
                    "visits": [{"order": v.item.order, "node": v.item.node, "arrival": v.arrival,
                                "completion": v.completion} for v in r.visits],
                    "end": r.end,
                    "finish": r.finish,
                }
                for r in self.routes
            ],
        }


# bytes charged per stored DP entry when checking the memory budget
_ENTRY_BYTES = 160


class Planner:
    """Exact solver for one (possibly constrained) planning problem."""

    def __init__(self, tdist: np.ndarray, depot: int, capacity: int, pick_time: int,
                 pushcart: bool, orders: Sequence[PlanOrder], start: Position, start_time: int,
                 budget: SolverBudget | None = None):
        self.tdist = tdist
        self.depot = int(depot)
        self.c = int(capacity)
        self.pick = int(pick_time)
        self.pushcart = pushcart
        self.start = start
        self.t0 = int(start_time)
        self.budget = budget or SolverBudget()
        self.forced = [o for o in orders if o.forced]
        self.pending = sorted((o for o in orders if not o.forced), key=lambda o: o.id)
        if len(self.forced) > self.c:
            raise ValueError("more commenced orders than bins")
        self.forced_items = [it for o in self.forced for it in o.items]
        self._deadline = time.monotonic() + self.budget.time_limit
        self._entries = 0
        self._static: dict[int, object] = {}
        # identical-location classes, members in release order
        groups: dict[tuple, list[int]] = {}
        for i, o in enumerate(self.pending):
            groups.setdefault(tuple(sorted(it.node for it in o.items)), []).append(i)
        self.classes = [sorted(m, key=lambda i: (self.pending[i].release, self.pending[i].id))
                        for m in groups.values()]
        self.classes.sort(key=lambda m: m[0])
        self.class_masks = [sum(1 << i for i in m) for m in self.classes]

    # -- helpers ------------------------------------------------------------

    def _check(self) -> None:
        if time.monotonic() > self._deadline:
            raise Unsolved("time", f"exceeded {self.budget.time_limit:g} s")
        if self._entries * _ENTRY_BYTES > self.budget.memory_limit:
            raise Unsolved("memory", f"{self._entries} states exceed the memory budget")

    def items_of(self, mask: int, first: bool = False) -> list[Item]:
        out = list(self.forced_items) if first else []
        i = 0
        while mask:
            if mask & 1:
                out.extend(self.pending[i].items)
            mask >>= 1
            i += 1
        if len(out) > self.budget.item_limit:
            raise Unsolved("batch-too-large",
                           f"{len(out)} items exceed the limit of {self.budget.item_limit}")
        return out

    def batches_from(self, mask: int, cap: int, allow_empty: bool = False) -> list[int]:
        """Candidate batches given completed set ``mask``, in lexicographic order."""
        avail = []
        for members, cm in zip(self.classes, self.class_masks):
            taken = bin(mask & cm).count("1")
            avail.append(members[taken:])
        out: list[tuple[int, ...]] = []

        def rec(ci: int, chosen: list[int]) -> None:
            if ci == len(avail):
                if chosen or allow_empty:
                    out.append(tuple(sorted(chosen)))
                return
            room = cap - len(chosen)
            for q in range(min(room, len(avail[ci])) + 1):
                rec(ci + 1, chosen + avail[ci][:q])

        rec(0, [])
        out.sort()
        return [sum(1 << i for i in b) for b in out]

    def _arrays(self, items: list[Item]):
        nodes = np.fromiter((it.node for it in items), dtype=np.int64, count=len(items))
        rel = np.fromiter((it.release for it in items), dtype=np.int64, count=len(items))
        return nodes, rel, self.tdist[np.ix_(nodes, nodes)]

    def _static_entry(self, b: int):
        hit = self._static.get(b)
        if hit is None:
            items = self.items_of(b)
            nodes, rel, sub = self._arrays(items)
            m = len(items)
            zero = np.zeros(m, dtype=np.int64)
            if self.pushcart:
                dp = hk_table(self.tdist[self.depot, nodes], sub, zero, self.pick)
                cost = int((dp[(1 << m) - 1] + self.tdist[nodes, self.depot]).min())
                hit = (items, nodes, rel, sub, cost)
            else:
                # path[j, i]: start by picking j at time 0, finish with i
                path = np.empty((m, m), dtype=np.int64)
                for j in range(m):
                    a0 = np.full(m, INF, dtype=np.int64)
                    a0[j] = 0
                    path[j] = hk_table(a0, sub, zero, self.pick)[(1 << m) - 1]
                hit = (items, nodes, rel, sub, path)
            self._static[b] = hit
        return hit

    def push_cost(self, t: int, b: int) -> int:
        items, nodes, rel, sub, cost = self._static_entry(b)
        arr0 = t + self.tdist[self.depot, nodes]
        if arr0.min() >= rel.max():
            return t + cost
        dp = hk_table(arr0, sub, rel, self.pick)
        return int((dp[(1 << len(items)) - 1] + self.tdist[nodes, self.depot]).min())

    def robot_row(self, arr0: np.ndarray, b: int) -> np.ndarray:
        items, nodes, rel, sub, path = self._static_entry(b)
        if arr0.min() >= rel.max():
            return (arr0[:, None] + path).min(axis=0)
        return hk_table(arr0, sub, rel, self.pick)[(1 << len(items)) - 1]

    @staticmethod
    def _entry(vnodes: np.ndarray, vtimes: np.ndarray, tdist: np.ndarray, nodes: np.ndarray) -> np.ndarray:
        return (vtimes[:, None] + tdist[np.ix_(vnodes, nodes)]).min(axis=0)

    # -- solve --------------------------------------------------------------

    def solve(self) -> Solution:
        n = len(self.pending)
        full = (1 << n) - 1
        if n == 0 and not self.forced:
            if self.pushcart and not (self.start.is_node and self.start.node == self.depot):
                fin = self.t0 + self.start.time_to(self.tdist, self.depot)
                return Solution(fin, [()], [route_batch(RoutingTask(
                    self.tdist, [], self.start, self.t0, self.depot, self.pick))])
            return Solution(self.t0, [], [])
        cap0 = self.c - len(self.forced)
        first = self.batches_from(0, cap0, allow_empty=bool(self.forced))
        if self.pushcart:
            return self._solve_push(first, full)
        return self._solve_robot(first, full)

    def _solve_push(self, first: list[int], full: int) -> Solution:
        n = len(self.pending)
        layers: list[dict[int, int]] = [dict() for _ in range(n + 1)]
        parent: dict[int, tuple[int | None, int]] = {}
        for b in first:
            items = self.items_of(b, first=True)
            task = RoutingTask(self.tdist, items, self.start, self.t0, self.depot, self.pick,
                               self.budget.item_limit)
            fin = self._first_finish(task)
            layer = layers[bin(b).count("1")]
            if b not in layer or fin < layer[b]:
                layer[b] = fin
                parent[b] = (None, b)
        self._entries += len(parent)
        for size in range(n + 1):
            for s in sorted(layers[size]):
                t = layers[size][s]
                self._check()
                for b in self.batches_from(s, self.c):
                    v = self.push_cost(t, b)
                    ns = s | b
                    layer = layers[size + bin(b).count("1")]
                    old = layer.get(ns)
                    if old is None:
                        self._entries += 1
                    if old is None or v < old:
                        layer[ns] = v
                        parent[ns] = (s, b)
        objective = layers[n][full]
        chain = []
        s = full
        while True:
            prev, b = parent[s]
            chain.append(b)
            if prev is None:
                break
            s = prev
        chain.reverse()
        routes = []
        t, pos = self.t0, self.start
        for k, b in enumerate(chain):
            task = RoutingTask(self.tdist, self.items_of(b, first=(k == 0)), pos, t, self.depot,
                               self.pick, self.budget.item_limit)
            r = route_batch(task)
            routes.append(r)
            t, pos = r.finish, Position.at(self.depot)
        assert t == objective, (t, objective)
        return Solution(int(objective), self._batch_ids(chain), routes)

    def _first_finish(self, task: RoutingTask) -> int:
        return route_value(task)

    def _batch_ids(self, chain: list[int]) -> list[tuple[int, ...]]:
        out = []
        for k, b in enumerate(chain):
            ids = [o.id for o in self.forced] if k == 0 else []
            ids += [self.pending[i].id for i in range(len(self.pending)) if b >> i & 1]
            out.append(tuple(sorted(ids)))
        return out

    def _solve_robot(self, first: list[int], full: int) -> Solution:
        n = len(self.pending)
        # value per state: {end node: time}; parent per (state, node): (prev, batch, last index)
        layers: list[dict[int, dict[int, int]]] = [dict() for _ in range(n + 1)]
        parent: dict[tuple[int, int], tuple[int | None, int, int]] = {}

        def relax(ns: int, nodes: np.ndarray, row: np.ndarray, prev: int | None, b: int) -> None:
            vals = layers[bin(ns).count("1")].setdefault(ns, {})
            for i in range(len(nodes)):
                v = int(row[i])
                if v >= INF:
                    continue
                node = int(nodes[i])
                old = vals.get(node)
                if old is None:
                    self._entries += 1
                if old is None or v < old:
                    vals[node] = v
                    parent[(ns, node)] = (prev, b, i)

        for b in first:
            items = self.items_of(b, first=True)
            if not items:
                # commenced orders already fully picked: the picker stays put
                here = self.start.u if self.start.to_u <= self.start.to_v else self.start.v
                wait = min(self.start.to_u, self.start.to_v)
                relax(b, np.array([here]), np.array([self.t0 + wait]), None, b)
                continue
            nodes, rel, sub = self._arrays(items)
            arr0 = self.t0 + self.start.times_to(self.tdist, nodes)
            row = hk_table(arr0, sub, rel, self.pick)[(1 << len(items)) - 1]
            relax(b, nodes, row, None, b)
        for size in range(n + 1):
            for s in sorted(layers[size]):
                self._check()
                vals = layers[size][s]
                vnodes = np.fromiter(vals.keys(), dtype=np.int64, count=len(vals))
                vtimes = np.fromiter(vals.values(), dtype=np.int64, count=len(vals))
                for b in self.batches_from(s, self.c):
                    _, nodes, _, _, _ = self._static_entry(b)
                    arr0 = self._entry(vnodes, vtimes, self.tdist, nodes)
                    relax(s | b, nodes, self.robot_row(arr0, b), s, b)
        final = layers[n][full]
        end_node = min(final, key=lambda k: (final[k], k))
        objective = final[end_node]

        # walk back to recover batches, their final items and chaining nodes
        steps = []
        s, node = full, end_node
        while True:
            prev, b, last = parent[(s, node)]
            steps.append((prev, b, last, node))
            if prev is None:
                break
            items = self.items_of(b)
            nodes, rel, sub = self._arrays(items)
            pv = layers[bin(prev).count("1")][prev]
            vnodes = np.fromiter(pv.keys(), dtype=np.int64, count=len(pv))
            vtimes = np.fromiter(pv.values(), dtype=np.int64, count=len(pv))
            arr0 = self._entry(vnodes, vtimes, self.tdist, nodes)
            dp = hk_table(arr0, sub, rel, self.pick)
            j = backtrack(dp, sub, rel, self.pick, last)[0]
            cand = vtimes + self.tdist[vnodes, nodes[j]]
            best = int(cand.min())
            node = int(min(vn for vn, c in zip(vnodes, cand) if c == best))
            s = prev
        steps.reverse()
        routes = []
        pos, t = self.start, self.t0
        for k, (prev, b, last, _) in enumerate(steps):
            if k > 0:
                pos = Position.at(steps[k - 1][3])
                t = layers[bin(prev).count("1")][prev][pos.u]
            task = RoutingTask(self.tdist, self.items_of(b, first=(k == 0)), pos, t, None,
                               self.pick, self.budget.item_limit)
            routes.append(route_batch(task, last=last))
        assert routes[-1].finish == objective, (routes[-1].finish, objective)
        return Solution(int(objective), self._batch_ids([st[1] for st in steps]), routes)


# -- public API -----------------------------------------------------------------

def plan_orders(instance: Instance, ids: Sequence[int] | None = None, releases: bool = True) -> list[PlanOrder]:
    ids = range(instance.n) if ids is None else ids
    out = []
    for j in ids:
        r = instance.arrivals[j] if releases else 0
        items = tuple(Item((j, s), int(instance.layout.slot_node[s]), r, j)
                      for s in instance.orders[j].slots)
        out.append(PlanOrder(j, items, r))
    return out


def solve_ciopt(instance: Instance, kind: "PolicyKind | str", budget: SolverBudget | None = None) -> Solution:
    """Exact complete-information optimum; raises :class:`Unsolved` on budget breach."""
    kind = PolicyKind.parse(kind)
    if instance.n == 0:
        return Solution(0, [], [])
    planner = Planner(instance.tdist, instance.layout.depot, instance.capacity, instance.pick_time,
                      kind.pushcart, plan_orders(instance), Position.at(instance.layout.depot), 0,
                      budget)
    return planner.solve()


def brute_force_ciopt(instance: Instance, kind: "PolicyKind | str") -> int:
    """Exhaustive search over ordered batch partitions and in-batch visit orders."""
    kind = PolicyKind.parse(kind)
    n = instance.n
    if n > 6 or sum(len(o.slots) for o in instance.orders) > 10:
        raise ValueError("instance too large for enumeration")
    if n == 0:
        return 0
    td = instance.tdist
    depot = instance.layout.depot
    pick = instance.pick_time
    c = instance.capacity
    items = [[(int(instance.layout.slot_node[s]), instance.arrivals[j]) for s in o.slots]
             for j, o in enumerate(instance.orders)]
    best = [None]

    def subsets(rest: list[int]) -> Iterator[tuple[int, ...]]:
        from itertools import combinations
        for k in range(1, min(c, len(rest)) + 1):
            yield from combinations(rest, k)

    def rec(rest: list[int], pos: int, t: int) -> None:
        if best[0] is not None and t >= best[0] and rest:
            return
        if not rest:
            if best[0] is None or t < best[0]:
                best[0] = t
            return
        for b in subsets(rest):
            batch = [it for j in b for it in items[j]]
            left = [j for j in rest if j not in b]
            for perm in set(permutations(batch)):
                tt, p = t, pos
                for node, r in perm:
                    tt = max(tt + int(td[p, node]), r) + pick
                    p = node
                if kind.pushcart:
                    tt += int(td[p, depot])
                    p = depot
                rec(left, p, tt)

    rec(list(range(n)), depot, 0)
    return int(best[0])


def lower_bounds(instance: Instance, kind: "PolicyKind | str") -> dict[str, int]:
    """``lb_release = r_n`` and ``lb_makespan = ceil(sum_j (M(o_j) + picks_j) / c)`` in time ticks."""
    kind = PolicyKind.parse(kind)
    if instance.n == 0:
        return {"lb_release": 0, "lb_makespan": 0}
    total = 0
    for j in range(instance.n):
        m = makespan(instance.nodes(j), instance.layout.dist, instance.layout.depot, kind.pushcart)
        total += m * instance.travel + len(instance.orders[j].slots) * instance.pick_time
    return {"lb_release": instance.arrivals[-1], "lb_makespan": -(-total // instance.capacity)}


__all__ = ["Planner", "PlanOrder", "Solution", "SolverBudget", "Unsolved", "brute_force_ciopt",
           "lower_bounds", "plan_orders", "solve_ciopt"]
